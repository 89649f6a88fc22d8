#pragma once

// Splitting x = z * y_plus against the form's parameter-reversing partner
// symmetry: z is fixed by that symmetry, y_plus is polynomial. The engine
// reduces to the two-sided splitting of u = (tau x)^-1 x, whose symmetry
// u -> u^-1 under tau forces the two halves to mirror each other; the
// constant gauge between them is fixed by a principal square root, which is
// also what makes the result reproducible run to run.

#include "loopfact/birkhoff.hpp"
#include "loopfact/involution.hpp"

namespace loopfact {

struct IwasawaOptions {
  int m = 0;                  // two-sided truncation order; 0 picks from u
  double tol = 1e-8;          // product residual and fixedness bound
  double branch_margin = 1e-6;
};

struct IwasawaFactors {
  // z_tau: fixed by the parameter-reversing symmetry.
  LaurentLoop z_tau = LaurentLoop::identity(1);
  // y_plus: polynomial, window [0, ...].
  LaurentLoop y_plus = LaurentLoop::identity(1);
  Mat c;  // constant twist linking the mirrored halves
  Mat b;  // its principal splitting, tau(b)^-1 b = c
  double residual = 0.0;
  double z_fixed_residual = 0.0;
  CellReport cell;
};

namespace detail {

// Principal square root of a constant that the symmetry inverts:
// tau(c) = c^-1. Refuses eigenvalues on the closed negative real axis
// rather than silently picking a branch.
inline Mat principal_half_power(const Involution& tau, const Mat& c,
                                double branch_margin) {
  Eigen::ComplexEigenSolver<Mat> eig(c);
  std::vector<Complex> spectrum(eig.eigenvalues().data(),
                                eig.eigenvalues().data() + c.rows());
  for (const Complex& ev : spectrum) {
    if (std::abs(ev) <= 1e-12) throw LogBranchFailureError(spectrum);
    if (ev.real() < 0.0 && std::abs(ev.imag()) <= branch_margin * std::abs(ev))
      throw LogBranchFailureError(spectrum);
  }
  const Mat x = Mat(c).log();
  const double anti = op_norm(apply_matrix_algebra(tau, x) + x);
  if (anti > 1e-7 * std::max(1.0, op_norm(x)))
    throw SymmetryResidualError(
        "log of the constant twist is not reversed by the symmetry", anti);
  return Mat(0.5 * x).exp();
}

}  // namespace detail

inline IwasawaFactors iwasawa_factor(const RealForm& f, const LaurentLoop& x,
                              const IwasawaOptions& opt = {}) {
  if (!f.tau)
    throw ParameterViolationError("form has no parameter-reversing partner");
  const Involution& tau = *f.tau;
  const int n = f.size;
  if (x.size() != n) throw ParameterViolationError("loop size mismatch");

  // u = (tau x)^-1 x, sampled pointwise so only u's own coefficient decay
  // matters, never the wider window of the intermediate inverse.
  LaurentLoop u = LaurentLoop::identity(n);
  {
    const int max_grid = 1 << 14;
    int N = next_pow2(std::max(256, 8 * x.term_count()));
    for (;; N *= 2) {
      std::vector<Mat> us(N);
      for (int j = 0; j < N; ++j) {
        const Complex lambda = unit_root(N, j);
        const Mat t = apply_matrix_group(tau, eval(x, param_map(tau, lambda)));
        if (smallest_singular_value(t) <= 1e-14 * std::max(1.0, op_norm(t)))
          throw SingularSampleError(
              "partner image of the loop is singular on the circle");
        us[j] = t.partialPivLu().solve(eval(x, lambda));
      }
      try {
        u = tighten(from_samples_auto(us, n, 1e-12, N / 4).loop, 1e-13);
        break;
      } catch (const TruncationResidualError&) {
        if (2 * N > max_grid) throw;
      }
    }
  }

  // The defining symmetry of u: applying the partner inverts it.
  {
    const int N = next_pow2(std::max(64, 2 * u.term_count()));
    double r = 0.0;
    const Mat id = Mat::Identity(n, n);
    for (int j = 0; j < N; ++j) {
      const Complex lambda = unit_root(N, j);
      const Mat m = apply_matrix_group(tau, eval(u, param_map(tau, lambda)));
      r = std::max(r, op_norm(m * eval(u, lambda) - id));
    }
    if (r > 10.0 * opt.tol)
      throw SymmetryResidualError(
          "partner symmetry does not invert the reduced loop", r);
  }

  int m = opt.m;
  if (m == 0) m = std::max(16, u.term_count() / 4 + 8);
  BirkhoffFactors inner;
  try {
    inner = birkhoff_factor(u, m);
  } catch (const NotInBigCellError& err) {
    throw BirkhoffSingularError(err.report);
  }

  const Mat c = apply_matrix_group(tau, inner.x_plus.coeff(0));
  {
    const double r = op_norm(apply_matrix_group(tau, c) * c -
                             Mat::Identity(n, n));
    if (r > 1e-8)
      throw SymmetryResidualError(
          "constant twist is not inverted by the symmetry", r);
  }
  const Mat b = detail::principal_half_power(tau, c, opt.branch_margin);

  LaurentLoop y_plus = multiply(LaurentLoop::constant(b), inner.x_plus);

  // z = x y_+^-1, sampled pointwise like u above: a polynomial inverse of
  // y_+ would smear solver error over a wide window, and spurious mass at
  // nonzero degrees is amplified geometrically when frames are evaluated
  // away from the unit circle.
  LaurentLoop z = LaurentLoop::identity(n);
  {
    const int max_grid = 1 << 14;
    int N = next_pow2(
        std::max(256, 8 * (x.term_count() + y_plus.term_count())));
    for (;; N *= 2) {
      std::vector<Mat> zs(N);
      for (int j = 0; j < N; ++j) {
        const Complex lambda = unit_root(N, j);
        const Mat y = eval(y_plus, lambda);
        if (smallest_singular_value(y) <= 1e-14 * std::max(1.0, op_norm(y)))
          throw SingularSampleError("plus factor is singular on the circle");
        zs[j] = y.transpose()
                    .partialPivLu()
                    .solve(eval(x, lambda).transpose())
                    .transpose();
      }
      try {
        z = tighten(from_samples_auto(zs, n, 1e-12, N / 4).loop, 1e-13);
        break;
      } catch (const TruncationResidualError&) {
        if (2 * N > max_grid) throw;
      }
    }
  }

  IwasawaFactors fac;
  fac.z_tau = z;
  fac.y_plus = tighten(y_plus, 1e-14);
  fac.c = c;
  fac.b = b;
  fac.cell = inner.cell;
  fac.residual = sup_norm(sub(x, multiply(fac.z_tau, fac.y_plus)));
  fac.z_fixed_residual = fixed_residual_group(tau, fac.z_tau);
  if (fac.residual > opt.tol)
    throw ResidualTooLargeError("splitting product residual too large",
                                fac.residual);
  if (fac.z_fixed_residual > opt.tol)
    throw ResidualTooLargeError("symmetric factor is not fixed by the partner",
                                fac.z_fixed_residual);
  return fac;
}

// ---------------------------------------------------------------------------
// Gauge handling. A valid pair (z, y_plus) can be shifted by any constant h
// fixed by the partner symmetry: (z h, h^-1 y_plus). The representative
// below depends only on the coset, so it erases such shifts.

struct IwasawaRepresentative {
  LaurentLoop z = LaurentLoop::identity(1);
  LaurentLoop y_plus = LaurentLoop::identity(1);
  Mat gauge;  // the constant that was removed
  // Distance of the gauge from the form's constant subgroup. Zero-ish when
  // the split loop lay in the twisted real form; meaningless otherwise.
  double gauge_form_residual = 0.0;
};

inline IwasawaRepresentative coset_representative(const RealForm& f,
                                                  const IwasawaFactors& fac,
                                                  double tol = 1e-8) {
  const Involution& tau = *f.tau;
  const Mat a0 = fac.y_plus.coeff(0);
  const Mat cy = apply_matrix_group(tau, a0).partialPivLu().solve(a0);
  const Mat a0_can = detail::principal_half_power(tau, cy, 1e-6);
  const Mat g = a0 * a0_can.partialPivLu().inverse();
  const double tau_res = op_norm(apply_matrix_group(tau, g) - g);
  if (tau_res > tol)
    throw NonCanonicalError(
        "gauge constant is not fixed by the partner symmetry (residual " +
        std::to_string(tau_res) + ")");
  IwasawaRepresentative rep;
  rep.gauge_form_residual = constant_residual_group(f, g);
  rep.z = multiply(fac.z_tau, LaurentLoop::constant(g));
  const Mat gi = g.partialPivLu().inverse();
  rep.y_plus = multiply(LaurentLoop::constant(gi), fac.y_plus);
  rep.gauge = g;
  return rep;
}

// Constant linking two symmetric factors of the same loop; rejects pairs
// whose quotient actually varies with the parameter.
struct ConstantLink {
  Mat h;
  double variation;
  double tau_residual;
  double form_residual;
};

inline ConstantLink verify_uniqueness(const RealForm& f, const LaurentLoop& z1,
                                      const LaurentLoop& z2,
                                      double tol = 1e-8) {
  const int n = z1.size();
  const int N = 16;
  std::vector<Mat> hs(N);
  double scale = 0.0;
  for (int j = 0; j < N; ++j) {
    const Complex lambda = unit_root(N, j);
    hs[j] = eval(z1, lambda).partialPivLu().solve(eval(z2, lambda));
    scale = std::max(scale, op_norm(hs[j]));
  }
  Mat mean = Mat::Zero(n, n);
  for (const Mat& h : hs) mean += h;
  mean /= static_cast<double>(N);
  double variation = 0.0;
  for (const Mat& h : hs) variation = std::max(variation, op_norm(h - mean));
  if (variation > tol * std::max(1.0, scale)) throw NotConstantError(variation);
  ConstantLink link;
  link.h = mean;
  link.variation = variation;
  link.tau_residual = op_norm(apply_matrix_group(*f.tau, mean) - mean);
  link.form_residual = constant_residual_group(f, mean);
  return link;
}

}  // namespace loopfact
