#pragma once

// Finite-order symmetries acting on loops: a matrix-level involution
// composed with a unit-circle parameter map. First-kind symmetries keep the
// loop parameter's orientation (lambda -> w*lambda, or lambda -> w*conj(lambda)
// for antilinear ones); second-kind symmetries reverse it
// (lambda -> w/lambda). Real forms bundle a set of commuting first-kind
// symmetries; their twisted loop groups are the home of everything downstream.

#include <optional>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "loopfact/laurent.hpp"

namespace loopfact {

enum class Core {
  Identity,          // M -> Q M Q
  Conjugate,         // M -> Q conj(M) Q
  InvTranspose,      // M -> Q (M^T)^-1 Q
  InvConjTranspose,  // M -> Q (M^*)^-1 Q
};

enum class Kind { First, Second };

inline bool is_antilinear(Core c) {
  return c == Core::Conjugate || c == Core::InvConjTranspose;
}

// Cores built on an anti-automorphism plus a group inversion. Their action
// on a loop needs a series inversion; coefficient-by-coefficient application
// would not be a homomorphism.
inline bool is_inverse_core(Core c) {
  return c == Core::InvTranspose || c == Core::InvConjTranspose;
}

struct Involution {
  std::string label;
  Kind kind = Kind::First;
  Core core = Core::Identity;
  double rotation = 1.0;  // +1 or -1
  Mat conjugator;         // Q with Q^2 = I

  static Involution make(std::string label, Kind kind, Core core,
                         double rotation, Mat q) {
    Involution v;
    v.label = std::move(label);
    v.kind = kind;
    v.core = core;
    v.rotation = rotation;
    v.conjugator = std::move(q);
    if (v.rotation != 1.0 && v.rotation != -1.0)
      throw ParameterViolationError("rotation must be +1 or -1");
    const int n = static_cast<int>(v.conjugator.rows());
    if (v.conjugator.cols() != n)
      throw ParameterViolationError("conjugator must be square");
    if (op_norm(v.conjugator * v.conjugator - Mat::Identity(n, n)) > 1e-12)
      throw ParameterViolationError("conjugator must square to the identity");
    return v;
  }

  int size() const { return static_cast<int>(conjugator.rows()); }
};

// The parameter map phi the symmetry composes with.
inline Complex param_map(const Involution& v, Complex lambda) {
  const Complex l = is_antilinear(v.core) ? std::conj(lambda) : lambda;
  return v.kind == Kind::First ? v.rotation * l : v.rotation / l;
}

// Matrix part on group elements.
inline Mat apply_matrix_group(const Involution& v, const Mat& m) {
  const Mat& q = v.conjugator;
  switch (v.core) {
    case Core::Identity:
      return q * m * q;
    case Core::Conjugate:
      return q * m.conjugate() * q;
    case Core::InvTranspose:
      return q * m.transpose().partialPivLu().inverse() * q;
    case Core::InvConjTranspose:
      return q * m.adjoint().partialPivLu().inverse() * q;
  }
  throw ParameterViolationError("unknown core");
}

// Matrix part linearized at the identity.
inline Mat apply_matrix_algebra(const Involution& v, const Mat& m) {
  const Mat& q = v.conjugator;
  switch (v.core) {
    case Core::Identity:
      return q * m * q;
    case Core::Conjugate:
      return q * m.conjugate() * q;
    case Core::InvTranspose:
      return -(q * m.transpose() * q);
    case Core::InvConjTranspose:
      return -(q * m.adjoint() * q);
  }
  throw ParameterViolationError("unknown core");
}

// Coefficient-level part of the action: parameter substitution fused with
// the entrywise piece of the core. For inverse cores this is only the
// anti-automorphism half; the group action follows it with a series
// inversion, the algebra action with a sign flip.
inline LaurentLoop entrywise_part(const Involution& v, const LaurentLoop& x) {
  const int n = x.size();
  if (v.size() != n) throw ParameterViolationError("involution size mismatch");
  const Mat& q = v.conjugator;
  std::vector<Mat> c;
  c.reserve(x.term_count());
  const bool second = v.kind == Kind::Second;
  const int lo = second ? -x.d_max() : x.d_min();
  const int hi = second ? -x.d_min() : x.d_max();
  for (int e = lo; e <= hi; ++e) {
    const int d = second ? -e : e;
    Mat m = x.coeff(d);
    switch (v.core) {
      case Core::Identity:
        break;
      case Core::Conjugate:
        m = m.conjugate().eval();
        break;
      case Core::InvTranspose:
        m = m.transpose().eval();
        break;
      case Core::InvConjTranspose:
        m = m.adjoint().eval();
        break;
    }
    const double rot = (e % 2 == 0) ? 1.0 : v.rotation;
    c.push_back(rot * (q * m * q));
  }
  return LaurentLoop(n, lo, std::move(c));
}

// Full action on a group-valued loop. Inverse cores append a series
// inversion whose window is chosen automatically under the cap.
inline LaurentLoop apply_group(const Involution& v, const LaurentLoop& x,
                               int window_cap = 0) {
  LaurentLoop w = entrywise_part(v, x);
  if (!is_inverse_core(v.core)) return w;
  if (window_cap == 0) window_cap = 4 * x.term_count() + 16;
  return invert_auto(w, 1e-12, window_cap);
}

// Full action on an algebra-valued loop; coefficient-exact for every core.
inline LaurentLoop apply_algebra(const Involution& v, const LaurentLoop& x) {
  LaurentLoop w = entrywise_part(v, x);
  return is_inverse_core(v.core) ? scale(w, -1.0) : w;
}

namespace detail {

inline int residual_grid(const LaurentLoop& x) {
  return next_pow2(std::max(32, 4 * x.term_count()));
}

}  // namespace detail

// Sup over sample points of || theta(x(phi(lambda))) - x(lambda) ||.
// Evaluation at phi(lambda) is exact for a finite series, so this measures
// distance from the twisted group with no truncation step.
inline double fixed_residual_group(const Involution& v, const LaurentLoop& x) {
  const int N = detail::residual_grid(x);
  double r = 0.0;
  for (int j = 0; j < N; ++j) {
    const Complex lambda = unit_root(N, j);
    const Mat m = eval(x, param_map(v, lambda));
    if (is_inverse_core(v.core) &&
        smallest_singular_value(m) <= 1e-14 * std::max(1.0, op_norm(m)))
      return std::numeric_limits<double>::infinity();
    r = std::max(r, op_norm(apply_matrix_group(v, m) - eval(x, lambda)));
  }
  return r;
}

inline double fixed_residual_algebra(const Involution& v,
                                     const LaurentLoop& x) {
  const int N = detail::residual_grid(x);
  double r = 0.0;
  for (int j = 0; j < N; ++j) {
    const Complex lambda = unit_root(N, j);
    const Mat m = eval(x, param_map(v, lambda));
    r = std::max(r, op_norm(apply_matrix_algebra(v, m) - eval(x, lambda)));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Real forms: a distinguished antilinear first-kind symmetry plus extra
// commuting first-kind symmetries, and an optional orientation-reversing
// partner used by the symmetric splitting.

struct RealForm {
  std::string name;
  int size = 0;
  Involution base;
  std::vector<Involution> extras;
  std::optional<Involution> tau;

  std::vector<const Involution*> first_kind() const {
    std::vector<const Involution*> v{&base};
    for (const Involution& e : extras) v.push_back(&e);
    return v;
  }
};

inline double fixed_residual_group(const RealForm& f, const LaurentLoop& x) {
  double r = 0.0;
  for (const Involution* v : f.first_kind())
    r = std::max(r, fixed_residual_group(*v, x));
  return r;
}

inline double fixed_residual_algebra(const RealForm& f, const LaurentLoop& x) {
  double r = 0.0;
  for (const Involution* v : f.first_kind())
    r = std::max(r, fixed_residual_algebra(*v, x));
  return r;
}

// Distance of a constant matrix from the form's constant subgroup.
inline double constant_residual_group(const RealForm& f, const Mat& h) {
  double r = 0.0;
  for (const Involution* v : f.first_kind())
    r = std::max(r, op_norm(apply_matrix_group(*v, h) - h));
  return r;
}

// Projection onto the joint fixed subspace of the form's linearized
// actions: the average of all subset compositions. The actions commute, so
// this is the product of the individual averaging projections.
inline LaurentLoop algebra_project(const RealForm& f, const LaurentLoop& x) {
  const auto invs = f.first_kind();
  LaurentLoop acc = x;
  for (const Involution* v : invs)
    acc = scale(add(acc, apply_algebra(*v, acc)), 0.5);
  return acc;
}

// ---------------------------------------------------------------------------
// Validation: involutivity of each symmetry and pairwise commutation, both
// checked at the matrix and parameter level, which together give the
// loop-level statements.

namespace detail {

inline void check_involutive(const Involution& v) {
  Rng rng(0x5eedu + static_cast<std::uint64_t>(v.core));
  const int n = v.size();
  for (int t = 0; t < 3; ++t) {
    const Mat m = Mat::Identity(n, n) + 0.3 * rng.complex_gaussian(n, n);
    if (op_norm(apply_matrix_group(v, apply_matrix_group(v, m)) - m) > 1e-10)
      throw ParameterViolationError("symmetry " + v.label +
                                    " is not involutive at matrix level");
    const Complex lambda = std::polar(1.0, rng.uniform(0.1, 6.0));
    if (std::abs(param_map(v, param_map(v, lambda)) - lambda) > 1e-12)
      throw ParameterViolationError("symmetry " + v.label +
                                    " is not involutive in the parameter");
  }
}

inline void check_commute(const Involution& a, const Involution& b) {
  Rng rng(0xc0ffeeu);
  const int n = a.size();
  for (int t = 0; t < 3; ++t) {
    const Mat m = Mat::Identity(n, n) + 0.3 * rng.complex_gaussian(n, n);
    const Mat ab = apply_matrix_group(a, apply_matrix_group(b, m));
    const Mat ba = apply_matrix_group(b, apply_matrix_group(a, m));
    if (op_norm(ab - ba) > 1e-10)
      throw ParameterViolationError("symmetries " + a.label + " and " +
                                    b.label + " do not commute");
    Complex lambda = std::polar(1.0, rng.uniform(0.1, 6.0));
    // Parameter maps compose contravariantly under antilinear cores, so
    // commutation must be checked through the full nested application.
    const Complex pab = param_map(b, param_map(a, lambda));
    const Complex pba = param_map(a, param_map(b, lambda));
    if (std::abs(pab - pba) > 1e-12)
      throw ParameterViolationError("parameter maps of " + a.label + " and " +
                                    b.label + " do not commute");
  }
}

}  // namespace detail

inline void validate(const RealForm& f) {
  if (!is_antilinear(f.base.core))
    throw ParameterViolationError("base symmetry must be antilinear");
  if (f.base.kind != Kind::First)
    throw ParameterViolationError("base symmetry must be first kind");
  std::vector<const Involution*> all = f.first_kind();
  if (f.tau) {
    if (f.tau->kind != Kind::Second)
      throw ParameterViolationError("partner symmetry must be second kind");
    all.push_back(&*f.tau);
  }
  for (const Involution* v : all) {
    if (v->size() != f.size)
      throw ParameterViolationError("symmetry size mismatch in form " + f.name);
    detail::check_involutive(*v);
  }
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      detail::check_commute(*all[i], *all[j]);
}

// ---------------------------------------------------------------------------
// Catalog.

// Loops fixed by the inverse-conjugate-transpose symmetry twisted by
// lambda -> eps*conj(lambda): unitary on the circle for eps = +1, and
// unitary on the slice taken by the twist for eps = -1. The bundled partner
// reverses the loop parameter with no matrix twist.
inline RealForm unitary_form(int n, double eps) {
  RealForm f;
  f.name = eps > 0 ? "un+" : "un-";
  f.size = n;
  f.base = Involution::make("rho", Kind::First, Core::InvConjTranspose, eps,
                            Mat::Identity(n, n));
  f.tau = Involution::make("tau", Kind::Second, Core::Identity, 1.0,
                           Mat::Identity(n, n));
  validate(f);
  return f;
}

// Split real form whose symmetric space side carries the curved-flat
// geometry: entrywise-real loops (after the sign twist), a signature
// involution with block sizes (n, k+1), a complex-orthogonality symmetry,
// and a parameter-reversing partner with block sizes (n+1, k).
inline RealForm curved_flat_form(int n, int k) {
  if (n < 2 || k < 1)
    throw ParameterViolationError("curved-flat form needs n >= 2, k >= 1");
  if (k < n - 1)
    throw ParameterViolationError("curved-flat form needs k >= n - 1");
  const int m = n + k + 1;
  RealForm f;
  f.name = "so-curved-flat";
  f.size = m;
  f.base = Involution::make("rho", Kind::First, Core::Conjugate, -1.0,
                            Mat::Identity(m, m));
  Mat p = Mat::Identity(m, m);
  for (int i = n; i < m; ++i) p(i, i) = -1.0;
  f.extras.push_back(
      Involution::make("sigma", Kind::First, Core::Identity, -1.0, p));
  f.extras.push_back(Involution::make("eta", Kind::First, Core::InvTranspose,
                                      1.0, Mat::Identity(m, m)));
  Mat q = Mat::Identity(m, m);
  for (int i = n + 1; i < m; ++i) q(i, i) = -1.0;
  f.tau = Involution::make("tau", Kind::Second, Core::Identity, 1.0, q);
  validate(f);
  return f;
}

// ---------------------------------------------------------------------------
// Random loops in the twisted group: exponentials of projected random
// algebra loops, with the algebra sup norm pinned to the requested
// amplitude. Exponentiation happens pointwise on an oversampled grid; the
// window is then recovered by coefficient mass.

struct RandomLoop {
  LaurentLoop group;
  LaurentLoop algebra;
};

inline RandomLoop random_loop(const RealForm& f, int degree, double amplitude,
                              std::uint64_t seed) {
  if (degree < 1) throw ParameterViolationError("degree must be positive");
  Rng rng(seed);
  const int n = f.size;
  std::vector<Mat> c;
  for (int d = -degree; d <= degree; ++d)
    c.push_back(rng.complex_gaussian(n, n));
  LaurentLoop xi = algebra_project(f, LaurentLoop(n, -degree, std::move(c)));
  const double s = sup_norm(xi);
  if (s == 0.0) throw ParameterViolationError("projected draw vanished");
  xi = scale(xi, amplitude / s);
  return {exp_pointwise(xi), std::move(xi)};
}

}  // namespace loopfact
