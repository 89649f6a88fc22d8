// Symmetry layer: coefficient-level actions against their pointwise
// definitions, projections, catalog forms, and random twisted-group loops.
// The pointwise definition theta(x(phi(lambda))) evaluated sample by sample
// is the oracle throughout; it shares no code with the coefficient path.

#include <catch2/catch_amalgamated.hpp>

#include "loopfact/involution.hpp"

using namespace loopfact;

namespace {

LaurentLoop seeded_loop(int n, int d_min, int d_max, std::uint64_t seed,
                        double amp) {
  Rng rng(seed);
  std::vector<Mat> c;
  for (int d = d_min; d <= d_max; ++d)
    c.push_back(amp * rng.complex_gaussian(n, n));
  return LaurentLoop(n, d_min, std::move(c));
}

LaurentLoop seeded_group_loop(int n, std::uint64_t seed) {
  return add(LaurentLoop::identity(n), seeded_loop(n, -2, 2, seed, 0.05));
}

double sampled_dist(const LaurentLoop& a, const LaurentLoop& b, int N = 64) {
  double r = 0.0;
  for (int j = 0; j < N; ++j) {
    const Complex lambda = unit_root(N, j);
    r = std::max(r, op_norm(eval(a, lambda) - eval(b, lambda)));
  }
  return r;
}

std::vector<Involution> catalog_involutions() {
  std::vector<Involution> out;
  for (const RealForm& f :
       {unitary_form(2, 1.0), unitary_form(3, -1.0), curved_flat_form(2, 1)}) {
    out.push_back(f.base);
    for (const Involution& e : f.extras) out.push_back(e);
    out.push_back(*f.tau);
  }
  return out;
}

}  // namespace

TEST_CASE("group action matches the pointwise definition") {
  std::uint64_t seed = 100;
  for (const Involution& v : catalog_involutions()) {
    const LaurentLoop x = seeded_group_loop(v.size(), seed++);
    const LaurentLoop y = apply_group(v, x);
    const int N = 32;
    for (int j = 0; j < N; ++j) {
      const Complex lambda = unit_root(N, j);
      const Mat expect =
          apply_matrix_group(v, eval(x, param_map(v, lambda)));
      REQUIRE(op_norm(eval(y, lambda) - expect) < 1e-9);
    }
  }
}

TEST_CASE("algebra action matches the pointwise definition exactly") {
  std::uint64_t seed = 200;
  for (const Involution& v : catalog_involutions()) {
    const LaurentLoop xi = seeded_loop(v.size(), -3, 3, seed++, 1.0);
    const LaurentLoop y = apply_algebra(v, xi);
    const int N = 32;
    for (int j = 0; j < N; ++j) {
      const Complex lambda = unit_root(N, j);
      const Mat expect =
          apply_matrix_algebra(v, eval(xi, param_map(v, lambda)));
      REQUIRE(op_norm(eval(y, lambda) - expect) < 1e-12);
    }
  }
}

TEST_CASE("actions are involutive on loops") {
  std::uint64_t seed = 300;
  for (const Involution& v : catalog_involutions()) {
    const LaurentLoop x = seeded_group_loop(v.size(), seed++);
    REQUIRE(sampled_dist(apply_group(v, apply_group(v, x)), x) < 1e-9);
    const LaurentLoop xi = seeded_loop(v.size(), -2, 2, seed++, 1.0);
    REQUIRE(max_coeff_diff(apply_algebra(v, apply_algebra(v, xi)), xi) < 1e-12);
  }
}

TEST_CASE("catalog symmetries commute pairwise on loops") {
  for (const RealForm& f : {unitary_form(2, -1.0), curved_flat_form(2, 1)}) {
    std::vector<const Involution*> all = f.first_kind();
    all.push_back(&*f.tau);
    std::uint64_t seed = 400;
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (std::size_t j = i + 1; j < all.size(); ++j) {
        const LaurentLoop x = seeded_group_loop(f.size, seed++);
        const LaurentLoop ab = apply_group(*all[i], apply_group(*all[j], x));
        const LaurentLoop ba = apply_group(*all[j], apply_group(*all[i], x));
        REQUIRE(sampled_dist(ab, ba) < 1e-8);
      }
    }
  }
}

TEST_CASE("parameter-reversing partner acts by plain degree reversal") {
  const RealForm un = unitary_form(2, 1.0);
  const LaurentLoop x = seeded_group_loop(2, 500);
  REQUIRE(max_coeff_diff(apply_group(*un.tau, x), reverse_degrees(x)) <
          1e-14);
  const RealForm cf = curved_flat_form(2, 1);
  const LaurentLoop y = seeded_group_loop(cf.size, 501);
  const LaurentLoop expect =
      conjugate_by(cf.tau->conjugator, reverse_degrees(y));
  REQUIRE(max_coeff_diff(apply_group(*cf.tau, y), expect) < 1e-14);
}

TEST_CASE("projection is idempotent and lands in the fixed subspace") {
  std::uint64_t seed = 600;
  for (const RealForm& f :
       {unitary_form(3, 1.0), unitary_form(2, -1.0), curved_flat_form(2, 1)}) {
    const LaurentLoop raw = seeded_loop(f.size, -3, 3, seed++, 1.0);
    const LaurentLoop p = algebra_project(f, raw);
    REQUIRE(max_coeff_diff(algebra_project(f, p), p) < 1e-13);
    REQUIRE(fixed_residual_algebra(f, p) < 1e-12);
    // The projection reproduces fixed points.
    REQUIRE(fixed_residual_algebra(f, sub(raw, p)) > 0.0);
  }
}

TEST_CASE("fixed-point residual detects violations at their size") {
  const RealForm f = unitary_form(2, 1.0);
  const RandomLoop rl = random_loop(f, 2, 0.4, 7);
  REQUIRE(fixed_residual_group(f, rl.group) < 1e-10);
  LaurentLoop bent = rl.group;
  Mat e = Mat::Zero(2, 2);
  e(0, 1) = Complex(0.0, 1e-3);
  bent.add_to_coeff(1, e);
  const double r = fixed_residual_group(f, bent);
  REQUIRE(r > 1e-4);
  REQUIRE(r < 1e-2);
}

TEST_CASE("random twisted loops are group valued and exp-consistent") {
  std::uint64_t seed = 700;
  for (const RealForm& f :
       {unitary_form(2, 1.0), unitary_form(3, -1.0), curved_flat_form(2, 1)}) {
    for (int degree : {1, 2}) {
      const RandomLoop rl = random_loop(f, degree, 0.5, seed++);
      REQUIRE(is_group_valued(rl.group));
      REQUIRE(sup_norm(rl.algebra) == Catch::Approx(0.5));
      REQUIRE(fixed_residual_group(f, rl.group) < 1e-9);
      REQUIRE(fixed_residual_algebra(f, rl.algebra) < 1e-12);
      // The group loop is the pointwise exponential of the algebra loop.
      for (int j = 0; j < 8; ++j) {
        const Complex lambda = unit_root(8, j);
        const Mat expect = Mat(eval(rl.algebra, lambda)).exp();
        REQUIRE(op_norm(eval(rl.group, lambda) - expect) < 1e-9);
      }
    }
  }
}

TEST_CASE("determinism: equal seeds reproduce loops exactly") {
  const RealForm f = curved_flat_form(2, 1);
  const RandomLoop a = random_loop(f, 2, 0.3, 42);
  const RandomLoop b = random_loop(f, 2, 0.3, 42);
  REQUIRE(max_coeff_diff(a.group, b.group) == 0.0);
  const RandomLoop c = random_loop(f, 2, 0.3, 43);
  REQUIRE(max_coeff_diff(a.group, c.group) > 1e-6);
}

TEST_CASE("malformed symmetries and forms are rejected at construction") {
  REQUIRE_THROWS_AS(Involution::make("bad", Kind::First, Core::Identity, 0.5,
                                     Mat::Identity(2, 2)),
                    ParameterViolationError);
  Mat not_reflection = 2.0 * Mat::Identity(2, 2);
  REQUIRE_THROWS_AS(Involution::make("bad", Kind::First, Core::Identity, 1.0,
                                     not_reflection),
                    ParameterViolationError);
  RealForm f;
  f.name = "broken";
  f.size = 2;
  f.base = Involution::make("rho", Kind::First, Core::Identity, 1.0,
                            Mat::Identity(2, 2));
  REQUIRE_THROWS_AS(validate(f), ParameterViolationError);
  REQUIRE_THROWS_AS(curved_flat_form(3, 1), ParameterViolationError);
}
