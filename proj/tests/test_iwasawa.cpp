// Symmetric splitting: recovery of assembled factorizations up to gauge,
// fixedness certificates, gauge-erasing representatives, uniqueness of the
// symmetric factor, and the branch guard on the constant square root.
// Assembled products are the oracle: z is built as the exponential of a
// projected algebra loop, so its fixedness is exact by construction.

#include <catch2/catch_amalgamated.hpp>

#include "loopfact/iwasawa.hpp"

using namespace loopfact;

namespace {

double sampled_dist(const LaurentLoop& a, const LaurentLoop& b, int N = 64) {
  double r = 0.0;
  for (int j = 0; j < N; ++j) {
    const Complex lambda = unit_root(N, j);
    r = std::max(r, op_norm(eval(a, lambda) - eval(b, lambda)));
  }
  return r;
}

// A loop fixed by the parameter-reversing partner, via the algebra.
LaurentLoop tau_fixed_loop(const RealForm& f, std::uint64_t seed, double amp) {
  Rng rng(seed);
  const int n = f.size;
  std::vector<Mat> c;
  for (int d = -2; d <= 2; ++d) c.push_back(rng.complex_gaussian(n, n));
  LaurentLoop xi(n, -2, std::move(c));
  xi = scale(add(xi, apply_algebra(*f.tau, xi)), 0.5);
  xi = scale(xi, amp / sup_norm(xi));
  return exp_pointwise(xi);
}

// A constant in the subgroup fixed by every symmetry of the curved-flat
// form: block-rotations of the two definite blocks.
Mat curved_flat_h0(int n, int k, double angle) {
  const int m = n + k + 1;
  Mat h = Mat::Identity(m, m);
  h(0, 0) = std::cos(angle);
  h(0, 1) = -std::sin(angle);
  h(1, 0) = std::sin(angle);
  h(1, 1) = std::cos(angle);
  return h;
}

}  // namespace

TEST_CASE("splitting recovers an assembled pair up to the constant gauge") {
  const RealForm f = unitary_form(3, 1.0);
  const LaurentLoop z = tau_fixed_loop(f, 5, 0.4);
  REQUIRE(fixed_residual_group(*f.tau, z) < 1e-10);
  Rng rng(6);
  LaurentLoop y = LaurentLoop::identity(3);
  y.add_to_coeff(0, 0.1 * rng.complex_gaussian(3, 3));
  y.set_coeff(1, 0.2 * rng.complex_gaussian(3, 3));
  y.set_coeff(2, 0.1 * rng.complex_gaussian(3, 3));
  const LaurentLoop x = multiply(z, y);

  const IwasawaFactors fac = iwasawa_factor(f, x);
  REQUIRE(fac.residual < 1e-8);
  REQUIRE(fac.z_fixed_residual < 1e-8);
  REQUIRE(fac.y_plus.d_min() >= 0);

  // The two symmetric factors differ by a constant fixed by the partner.
  const ConstantLink link = verify_uniqueness(f, z, fac.z_tau);
  REQUIRE(link.variation < 1e-8);
  REQUIRE(link.tau_residual < 1e-8);

  // After erasing the gauge on both sides, the factors agree outright.
  IwasawaFactors known;
  known.z_tau = z;
  known.y_plus = y;
  const IwasawaRepresentative ra = coset_representative(f, fac);
  const IwasawaRepresentative rb = coset_representative(f, known);
  REQUIRE(sampled_dist(ra.z, rb.z) < 1e-8);
  REQUIRE(sampled_dist(ra.y_plus, rb.y_plus) < 1e-8);
}

TEST_CASE("random twisted loops split with certified factors") {
  std::uint64_t seed = 1000;
  for (const RealForm& f : {unitary_form(2, 1.0), unitary_form(2, -1.0),
                            curved_flat_form(2, 1)}) {
    for (int degree : {1, 2}) {
      const RandomLoop rl = random_loop(f, degree, 0.4, seed++);
      const IwasawaFactors fac = iwasawa_factor(f, rl.group);
      REQUIRE(fac.residual < 1e-8);
      REQUIRE(fac.z_fixed_residual < 1e-8);
      // Both factors stay in the twisted real form.
      REQUIRE(fixed_residual_group(f, fac.z_tau) < 1e-7);
      REQUIRE(fixed_residual_group(f, fac.y_plus) < 1e-7);
    }
  }
}

TEST_CASE("gauge shifts by fixed constants are erased exactly") {
  const RealForm f = curved_flat_form(2, 1);
  const RandomLoop rl = random_loop(f, 2, 0.4, 1100);
  const IwasawaFactors fac = iwasawa_factor(f, rl.group);
  const Mat h = curved_flat_h0(2, 1, 0.8);
  REQUIRE(constant_residual_group(f, h) < 1e-14);
  REQUIRE(op_norm(apply_matrix_group(*f.tau, h) - h) < 1e-14);

  IwasawaFactors shifted = fac;
  shifted.z_tau = multiply(fac.z_tau, LaurentLoop::constant(h));
  shifted.y_plus =
      multiply(LaurentLoop::constant(Mat(h.inverse())), fac.y_plus);
  const IwasawaRepresentative ra = coset_representative(f, fac);
  const IwasawaRepresentative rb = coset_representative(f, shifted);
  REQUIRE(sampled_dist(ra.z, rb.z) < 1e-10);
  REQUIRE(sampled_dist(ra.y_plus, rb.y_plus) < 1e-10);
}

TEST_CASE("a constant shift of the input is recovered between the factors") {
  // Multiplying the input by a fixed constant h moves the gauge-erased
  // symmetric factor by exactly h on the right, so comparing the two
  // representatives recovers h.
  const RealForm f = curved_flat_form(2, 1);
  const RandomLoop rl = random_loop(f, 1, 0.4, 1200);
  const Mat h = curved_flat_h0(2, 1, -1.1);
  const LaurentLoop xh = multiply(rl.group, LaurentLoop::constant(h));
  const IwasawaRepresentative ra =
      coset_representative(f, iwasawa_factor(f, rl.group));
  const IwasawaRepresentative rb = coset_representative(f, iwasawa_factor(f, xh));
  const ConstantLink link = verify_uniqueness(f, ra.z, rb.z);
  REQUIRE(op_norm(link.h - h) < 1e-8);
  REQUIRE(link.tau_residual < 1e-8);
  REQUIRE(link.form_residual < 1e-8);
}

TEST_CASE("uniqueness check rejects parameter-dependent quotients") {
  const RealForm f = unitary_form(2, 1.0);
  const RandomLoop rl = random_loop(f, 1, 0.4, 1300);
  const IwasawaFactors fac = iwasawa_factor(f, rl.group);
  LaurentLoop bent = multiply(fac.z_tau, fac.y_plus);  // differs by y_plus
  REQUIRE_THROWS_AS(verify_uniqueness(f, fac.z_tau, bent), NotConstantError);
}

TEST_CASE("constants needing a flipped branch are refused with a spectrum") {
  const RealForm f = curved_flat_form(2, 1);
  // A constant loop whose reduced twist is a rotation by pi between the
  // blocks the partner separates: its square root would cross the branch.
  Mat g = Mat::Identity(4, 4);
  const double t = std::numbers::pi / 2.0;
  g(2, 2) = std::cos(t);
  g(2, 3) = -std::sin(t);
  g(3, 2) = std::sin(t);
  g(3, 3) = std::cos(t);
  try {
    iwasawa_factor(f, LaurentLoop::constant(g));
    FAIL("expected a branch failure");
  } catch (const LogBranchFailureError& err) {
    bool has_negative = false;
    for (const Complex& ev : err.spectrum)
      if (ev.real() < -0.5 && std::abs(ev.imag()) < 1e-8) has_negative = true;
    REQUIRE(has_negative);
  }
}

TEST_CASE("splitting is deterministic") {
  const RealForm f = unitary_form(2, -1.0);
  const RandomLoop rl = random_loop(f, 2, 0.4, 1400);
  const IwasawaFactors a = iwasawa_factor(f, rl.group);
  const IwasawaFactors b = iwasawa_factor(f, rl.group);
  REQUIRE(max_coeff_diff(a.z_tau, b.z_tau) == 0.0);
  REQUIRE(max_coeff_diff(a.y_plus, b.y_plus) == 0.0);
}
