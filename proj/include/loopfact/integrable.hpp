#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "loopfact/iwasawa.hpp"

// Commuting vacuum fields on the block real form, frames integrated from
// them over parameter grids, dressing by negative-degree group loops, and
// surface samples read off a fixed spectral value. The canonical section
// pins the residual constant-subgroup freedom of every pointwise splitting
// through the frame value at lambda = i, so repeated dressing composes
// across the grid without any cross-point alignment step.

namespace loopfact {

// ---------------------------------------------------------------------------
// Parameter grids, row-major over the axes in order.

struct GridSpec {
  std::vector<double> origin;
  double spacing = 0.0;
  std::vector<int> counts;

  int dim() const { return static_cast<int>(counts.size()); }

  long total() const {
    long t = 1;
    for (int c : counts) t *= c;
    return t;
  }

  // Flat-index distance between neighbours along one axis.
  long stride(int axis) const {
    long s = 1;
    for (int a = axis + 1; a < dim(); ++a) s *= counts[a];
    return s;
  }

  std::vector<int> unflatten(long flat) const {
    std::vector<int> idx(counts.size(), 0);
    for (int a = dim() - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(flat % counts[a]);
      flat /= counts[a];
    }
    return idx;
  }

  std::vector<double> point(long flat) const {
    const std::vector<int> idx = unflatten(flat);
    std::vector<double> x(idx.size());
    for (int a = 0; a < dim(); ++a) x[a] = origin[a] + spacing * idx[a];
    return x;
  }

  void validate() const {
    if (dim() == 0 || origin.size() != counts.size())
      throw ParameterViolationError("grid needs matching origin and counts");
    if (!(spacing > 0.0))
      throw ParameterViolationError("grid spacing must be positive");
    for (int c : counts)
      if (c < 1) throw ParameterViolationError("grid counts must be positive");
  }
};

// Grid centred on the origin with the same count along every axis.
inline GridSpec centered_grid(int dim, int count, double spacing) {
  GridSpec g;
  g.spacing = spacing;
  g.counts.assign(static_cast<std::size_t>(dim), count);
  g.origin.assign(static_cast<std::size_t>(dim),
                  -0.5 * spacing * (count - 1));
  g.validate();
  return g;
}

// Frame field over a grid: one group-valued loop per point, all in the same
// real form and fixed by its parameter-reversing symmetry. block_n and
// block_k are the diagonal block sizes (n, 1, k) of the residual constant
// subgroup used by the canonical section.
struct GridFrame {
  GridSpec grid;
  int block_n = 0;
  int block_k = 0;
  RealForm form;
  std::vector<LaurentLoop> values;
};

// ---------------------------------------------------------------------------
// Vacuum fields: pairwise commuting degree-one algebra loops whose flows
// integrate to a frame by a pointwise exponential.

struct VacuumFamily {
  int n = 0;
  int k = 0;
  RealForm form;
  std::vector<LaurentLoop> fields;
  std::vector<double> amplitudes;
};

// Largest commutator norm among the fields over a circle sample. Zero to
// roundoff is what turns the pointwise exponential into a frame.
inline double family_flatness(const std::vector<LaurentLoop>& fields) {
  double worst = 0.0;
  const int N = 16;
  for (std::size_t i = 0; i < fields.size(); ++i)
    for (std::size_t j = i + 1; j < fields.size(); ++j)
      for (int t = 0; t < N; ++t) {
        const Complex lam = unit_root(N, t);
        const Mat a = eval(fields[i], lam);
        const Mat b = eval(fields[j], lam);
        worst = std::max(worst, op_norm(Mat(a * b - b * a)));
      }
  return worst;
}

// Build `count` commuting fields on the (n, k) block form. Each field pairs
// one row of the upper block with one column of the lower block; distinct
// pairings commute on both sides of the pairing, and only min(n, k + 1) of
// them fit. The seed draws a basis rotation inside the residual symmetry
// group, which keeps both the commutation and the symmetry constraints.
// Every field is scaled so its sup norm equals `amplitude` exactly. The
// first field's value at lambda = i vanishes.
inline VacuumFamily vacuum_generators(int n, int k, int count,
                                      double amplitude, std::uint64_t seed) {
  if (count < 1)
    throw ParameterViolationError("need at least one vacuum field");
  if (!(amplitude > 0.0))
    throw ParameterViolationError("field amplitude must be positive");
  if (count > std::min(n, k + 1))
    throw NoAbelianFamilyError(
        "only min(n, k + 1) pairwise commuting degree-one fields exist on "
        "this form; requested " + std::to_string(count));
  VacuumFamily fam;
  fam.n = n;
  fam.k = k;
  fam.form = curved_flat_form(n, k);
  const int m = n + k + 1;
  const Mat q = fam.form.tau->conjugator;
  Rng rng(seed);
  RealMat rot = RealMat::Identity(m, m);
  if (n > 1) rot.topLeftCorner(n, n) = rng.special_orthogonal(n);
  if (k > 1) rot.bottomRightCorner(k, k) = rng.special_orthogonal(k);
  for (int i = 0; i < count; ++i) {
    RealMat a = RealMat::Zero(m, m);
    a(i, n + i) = 1.0;
    a(n + i, i) = -1.0;
    a = rot * a * rot.transpose();
    const Mat ca = Complex(0.0, 1.0) * a.cast<Complex>();
    std::vector<Mat> cs{ca, Mat::Zero(m, m), Mat(q * ca * q)};
    LaurentLoop field(m, -1, std::move(cs));
    field = scale(field, Complex(amplitude / sup_norm(field), 0.0));
    if (fixed_residual_algebra(fam.form, field) > 1e-12 ||
        fixed_residual_algebra(*fam.form.tau, field) > 1e-12)
      throw Error("vacuum field failed its symmetry checks");
    fam.fields.push_back(std::move(field));
    fam.amplitudes.push_back(amplitude);
  }
  if (family_flatness(fam.fields) > 1e-12)
    throw Error("vacuum fields failed the commutation check");
  return fam;
}

// Frame value of the integrated flows at one parameter point.
inline LaurentLoop vacuum_frame(const VacuumFamily& fam,
                                const std::vector<double>& x) {
  if (x.size() != fam.fields.size())
    throw ParameterViolationError("parameter point has wrong dimension");
  LaurentLoop xi = LaurentLoop::zero(fam.form.size);
  for (std::size_t i = 0; i < x.size(); ++i)
    xi = add(xi, scale(fam.fields[i], Complex(x[i], 0.0)));
  return exp_pointwise(xi, 1e-12);
}

// Integrate the commuting flows over a grid. Every value is certified to
// stay in the form and fixed by the parameter-reversing symmetry.
inline GridFrame integrate_vacuum(const VacuumFamily& fam,
                                  const GridSpec& grid) {
  grid.validate();
  if (grid.dim() != static_cast<int>(fam.fields.size()))
    throw ParameterViolationError("grid dimension must match the field count");
  GridFrame out;
  out.grid = grid;
  out.block_n = fam.n;
  out.block_k = fam.k;
  out.form = fam.form;
  out.values.reserve(static_cast<std::size_t>(grid.total()));
  for (long p = 0; p < grid.total(); ++p) {
    LaurentLoop f = vacuum_frame(fam, grid.point(p));
    const double r = std::max(fixed_residual_group(fam.form, f),
                              fixed_residual_group(*fam.form.tau, f));
    if (r > 1e-8)
      throw FormViolationError("integrated frame left the form", r);
    out.values.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Connection readings. A frame field determines its connection through
// one-sided differences alpha = F(x)^-1 (F(x + h e) - F(x)) / h, sampled
// pointwise on the circle and reassembled. For a frame of an integrable
// surface all coefficient mass sits in degrees -1..1 up to O(h).

struct ConnectionReading {
  long base = 0;  // flat index of the left endpoint
  Mat alpha_minus, alpha_zero, alpha_plus;
  double leakage = 0.0;  // coefficient mass outside degrees -1..1
};

struct MaurerCartanSample {
  double step = 0.0;
  std::vector<std::vector<ConnectionReading>> by_axis;
  double max_leakage = 0.0;
};

inline MaurerCartanSample maurer_cartan(const GridFrame& frame) {
  frame.grid.validate();
  if (frame.values.size() != static_cast<std::size_t>(frame.grid.total()))
    throw ParameterViolationError("frame values do not cover the grid");
  const int msz = frame.form.size;
  MaurerCartanSample out;
  out.step = frame.grid.spacing;
  out.by_axis.resize(static_cast<std::size_t>(frame.grid.dim()));
  for (int a = 0; a < frame.grid.dim(); ++a) {
    const long stride = frame.grid.stride(a);
    for (long p = 0; p < frame.grid.total(); ++p) {
      if (frame.grid.unflatten(p)[a] + 1 >= frame.grid.counts[a]) continue;
      const LaurentLoop& f1 = frame.values[static_cast<std::size_t>(p)];
      const LaurentLoop& f2 =
          frame.values[static_cast<std::size_t>(p + stride)];
      const int terms = std::max(f1.term_count(), f2.term_count());
      const int N = next_pow2(std::max(256, 4 * terms));
      const std::vector<Mat> s1 = to_samples(f1, N);
      const std::vector<Mat> s2 = to_samples(f2, N);
      std::vector<Mat> ds(static_cast<std::size_t>(N));
      for (int j = 0; j < N; ++j)
        ds[static_cast<std::size_t>(j)] = s1[static_cast<std::size_t>(j)]
            .partialPivLu()
            .solve(Mat((s2[static_cast<std::size_t>(j)] -
                        s1[static_cast<std::size_t>(j)]) /
                       frame.grid.spacing));
      const std::vector<Mat> bins = sample_bins(ds, msz);
      auto bin_at = [&](int d) -> const Mat& {
        return bins[static_cast<std::size_t>(((d % N) + N) % N)];
      };
      ConnectionReading r;
      r.base = p;
      r.alpha_minus = bin_at(-1);
      r.alpha_zero = bin_at(0);
      r.alpha_plus = bin_at(1);
      double leak = 0.0;
      for (int d = -N / 2; d < N - N / 2; ++d)
        if (d < -1 || d > 1) leak += op_norm(bin_at(d));
      r.leakage = leak;
      out.max_leakage = std::max(out.max_leakage, leak);
      out.by_axis[static_cast<std::size_t>(a)].push_back(std::move(r));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dressing elements: group loops in the form supported on nonpositive
// degrees.

inline void require_dressing_element(const RealForm& f, const LaurentLoop& g,
                                     double tol = 1e-8) {
  double plus_mass = 0.0;
  for (int d = 1; d <= g.d_max(); ++d) plus_mass += op_norm(g.coeff(d));
  if (plus_mass > tol * std::max(sup_norm(g), 1e-300))
    throw WrongSidedInputError("dressing element has positive-degree mass");
  const double r = fixed_residual_group(f, g);
  if (r > tol)
    throw FormViolationError("dressing element is not in the form", r);
}

// Seeded dressing element: a Gaussian algebra loop supported on degrees
// [-degree, -1], projected into the form, scaled to the requested sup norm,
// and exponentiated pointwise.
inline LaurentLoop random_dressing(const RealForm& f, int degree,
                                   double amplitude, std::uint64_t seed) {
  if (degree < 1)
    throw ParameterViolationError("dressing degree must be at least 1");
  if (!(amplitude > 0.0))
    throw ParameterViolationError("dressing amplitude must be positive");
  Rng rng(seed);
  std::vector<Mat> cs;
  cs.reserve(static_cast<std::size_t>(degree));
  for (int d = -degree; d <= -1; ++d)
    cs.push_back(rng.complex_gaussian(f.size, f.size));
  LaurentLoop xi =
      algebra_project(f, LaurentLoop(f.size, -degree, std::move(cs)));
  const double s = sup_norm(xi);
  if (!(s > 0.0))
    throw ParameterViolationError("projected dressing seed vanished");
  xi = scale(xi, Complex(amplitude / s, 0.0));
  const LaurentLoop ge = exp_pointwise(xi, 1e-12);
  const TruncateResult tr = truncate(ge, std::min(ge.d_min(), -1), 0);
  if (tr.discarded > 1e-9)
    throw TruncationResidualError("dressing exponential leaked outside its window",
                                  tr.discarded);
  LaurentLoop g = tighten(tr.loop, 1e-14);
  require_dressing_element(f, g, 1e-9);
  return g;
}

// ---------------------------------------------------------------------------
// Canonical section of the residual constant-subgroup freedom.

namespace detail {

// Nearest rotation to a real square block in Frobenius norm, constrained to
// determinant +1. Refuses blocks whose smallest singular value makes the
// choice unstable.
inline RealMat special_polar_rotation(const RealMat& b) {
  if (b.rows() == 0) return b;
  Eigen::JacobiSVD<RealMat> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(s.size() - 1) <= 1e-8 * s(0))
    throw NonCanonicalError("section block is too close to singular");
  RealMat u = svd.matrixU();
  if ((u * svd.matrixV().transpose()).determinant() < 0.0)
    u.col(u.cols() - 1) *= -1.0;
  return u * svd.matrixV().transpose();
}

}  // namespace detail

// Canonical representative of the right coset z * (SO(n) x {1} x SO(k)). The
// value of a parameter-reversal-fixed frame at lambda = i is real
// orthogonal; rotating its two outer diagonal blocks to their polar
// alignment picks one representative, and frames that agree up to the
// constant subgroup map to the same output. gauge receives the rotation h
// with result = z * h^T.
inline LaurentLoop canonical_frame(int block_n, int block_k,
                                   const LaurentLoop& z, Mat* gauge = nullptr,
                                   double tol = 1e-6) {
  const int m = block_n + block_k + 1;
  if (z.size() != m)
    throw ParameterViolationError("block sizes do not match the loop");
  const Mat zi = eval(z, Complex(0.0, 1.0));
  const double defect =
      std::max(zi.imag().cwiseAbs().maxCoeff(),
               op_norm(Mat(zi.transpose() * zi - Mat::Identity(m, m))));
  if (defect > tol)
    throw NonCanonicalError(
        "frame value at lambda = i is not real orthogonal");
  const RealMat r = zi.real();
  RealMat h = RealMat::Identity(m, m);
  h.topLeftCorner(block_n, block_n) =
      detail::special_polar_rotation(r.topLeftCorner(block_n, block_n));
  h.bottomRightCorner(block_k, block_k) =
      detail::special_polar_rotation(r.bottomRightCorner(block_k, block_k));
  if (gauge) *gauge = h.cast<Complex>();
  return multiply(z, LaurentLoop::constant(
                         Mat(h.transpose().cast<Complex>())));
}

// ---------------------------------------------------------------------------
// Dressing. Splitting g_minus * F against the parameter-reversing symmetry
// replaces the frame by the fixed factor of the splitting; the canonical
// section makes the result a function of the fixed factor's coset alone.

struct DressResult {
  LaurentLoop frame = LaurentLoop::identity(1);
  LaurentLoop y_plus = LaurentLoop::identity(1);  // frame * y_plus = g * F
  Mat gauge;
  double residual = 0.0;
  double fixed_residual = 0.0;
};

inline DressResult dress_value(const RealForm& f, int block_n, int block_k,
                               const LaurentLoop& g_minus,
                               const LaurentLoop& value,
                               const IwasawaOptions& opt = {}) {
  const IwasawaFactors fac = iwasawa_factor(f, multiply(g_minus, value), opt);
  DressResult out;
  Mat h;
  out.frame = canonical_frame(block_n, block_k, fac.z_tau, &h);
  out.gauge = h;
  out.y_plus = multiply(LaurentLoop::constant(h), fac.y_plus);
  out.residual = fac.residual;
  out.fixed_residual = fixed_residual_group(*f.tau, out.frame);
  return out;
}

struct DressStats {
  double max_residual = 0.0;
  double max_fixed_residual = 0.0;
};

// Dress every value of a grid frame by the same element. Because the
// canonical section is coset-intrinsic, dress(dress(F, h), g) agrees with
// dress(F, g * h) pointwise.
inline GridFrame dress(const GridFrame& frame, const LaurentLoop& g_minus,
                       const IwasawaOptions& opt = {},
                       DressStats* stats = nullptr) {
  require_dressing_element(frame.form, g_minus, 10 * opt.tol);
  GridFrame out;
  out.grid = frame.grid;
  out.block_n = frame.block_n;
  out.block_k = frame.block_k;
  out.form = frame.form;
  out.values.reserve(frame.values.size());
  DressStats st;
  for (const LaurentLoop& v : frame.values) {
    DressResult r =
        dress_value(frame.form, frame.block_n, frame.block_k, g_minus, v, opt);
    st.max_residual = std::max(st.max_residual, r.residual);
    st.max_fixed_residual = std::max(st.max_fixed_residual, r.fixed_residual);
    out.values.push_back(std::move(r.frame));
  }
  if (stats) *stats = st;
  return out;
}

// ---------------------------------------------------------------------------
// Surface samples at a fixed spectral value.

struct SurfaceSample {
  GridSpec grid;
  Complex lambda0;
  bool sphere = false;
  int ambient = 0;
  std::vector<Eigen::VectorXd> points;     // imaginary branch: unit vectors
  std::vector<Eigen::VectorXcd> columns;   // circle branch
  Mat invariant;                           // circle branch, middle entry -1
  double invariant_residual = 0.0;
  double point_residual = 0.0;
};

namespace detail {

// Inertia (negative count, positive count) of a Hermitian matrix with a
// relative zero threshold.
inline std::pair<int, int> hermitian_signature(const Mat& f) {
  Eigen::SelfAdjointEigenSolver<Mat> es(f);
  const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  int neg = 0, pos = 0;
  for (int j = 0; j < es.eigenvalues().size(); ++j) {
    if (es.eigenvalues()(j) < -1e-10 * scale) ++neg;
    if (es.eigenvalues()(j) > 1e-10 * scale) ++pos;
  }
  return {neg, pos};
}

// Hermitian form preserved by all sample matrices, as the least-squares
// null direction over the real span of a Hermitian basis. A symmetry of the
// whole sample set can leave a two-dimensional space of invariant forms; the
// returned form is then the best-conditioned combination (largest |det| at
// unit Frobenius norm) with one negative direction, which is deterministic
// where a bare smallest-singular-vector read would be a noise-driven mix.
inline Mat identify_invariant_form(const std::vector<Mat>& samples, int m,
                                   int mid) {
  std::vector<Mat> basis;
  basis.reserve(static_cast<std::size_t>(m) * m);
  for (int p = 0; p < m; ++p) {
    Mat b = Mat::Zero(m, m);
    b(p, p) = 1.0;
    basis.push_back(b);
  }
  for (int p = 0; p < m; ++p)
    for (int q = p + 1; q < m; ++q) {
      Mat b = Mat::Zero(m, m);
      b(p, q) = 1.0;
      b(q, p) = 1.0;
      basis.push_back(b);
      Mat c = Mat::Zero(m, m);
      c(p, q) = Complex(0.0, 1.0);
      c(q, p) = Complex(0.0, -1.0);
      basis.push_back(c);
    }
  const int params = static_cast<int>(basis.size());
  RealMat lhs(2 * m * m * static_cast<int>(samples.size()), params);
  for (std::size_t s = 0; s < samples.size(); ++s)
    for (int r = 0; r < params; ++r) {
      const Mat g = samples[s].adjoint() * basis[static_cast<std::size_t>(r)] *
                        samples[s] -
                    basis[static_cast<std::size_t>(r)];
      int row = static_cast<int>(s) * 2 * m * m;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          lhs(row++, r) = g(i, j).real();
          lhs(row++, r) = g(i, j).imag();
        }
    }
  Eigen::JacobiSVD<RealMat> svd(lhs, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const auto assemble = [&](int col) {
    const Eigen::VectorXd theta = svd.matrixV().col(col);
    Mat form = Mat::Zero(m, m);
    for (int r = 0; r < params; ++r)
      form += theta(r) * basis[static_cast<std::size_t>(r)];
    return Mat(0.5 * (form + form.adjoint()));
  };
  int null_dim = 1;
  while (null_dim < params && sv(params - 1 - null_dim) <= 1e-5 * sv(0))
    ++null_dim;
  if (null_dim == 1) return assemble(params - 1);
  if (null_dim > 2)
    throw SignatureError("invariant form has too many flat directions");
  const Mat m1 = assemble(params - 1);
  const Mat m2 = assemble(params - 2);
  const auto blend = [&](double t) {
    return Mat(std::cos(t) * m1 + std::sin(t) * m2);
  };
  const auto cond = [&](double t) {
    const Mat f = blend(t);
    const double nrm = f.norm();
    return nrm > 0.0 ? std::abs(f.determinant()) / std::pow(nrm, m) : 0.0;
  };
  const int steps = 720;  // blend(t + pi) = -blend(t), so scan one period
  std::vector<double> val(steps);
  for (int s = 0; s < steps; ++s)
    val[s] = cond(M_PI * s / steps);
  std::vector<int> peaks;
  for (int s = 0; s < steps; ++s)
    if (val[s] >= val[(s + steps - 1) % steps] &&
        val[s] >= val[(s + 1) % steps])
      peaks.push_back(s);
  std::sort(peaks.begin(), peaks.end(),
            [&](int a, int b) { return val[a] > val[b]; });
  for (const int s : peaks) {
    const double w = M_PI / steps;
    double lo = M_PI * s / steps - w;
    double hi = M_PI * s / steps + w;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - gr * (hi - lo);
    double b = lo + gr * (hi - lo);
    double fa = cond(a);
    double fb = cond(b);
    for (int it = 0; it < 60; ++it) {
      if (fa < fb) {
        lo = a;
        a = b;
        fa = fb;
        b = lo + gr * (hi - lo);
        fb = cond(b);
      } else {
        hi = b;
        b = a;
        fb = fa;
        a = hi - gr * (hi - lo);
        fa = cond(a);
      }
    }
    Mat f = blend(0.5 * (lo + hi));
    if (std::abs(f(mid, mid).real()) <= 1e-8 * op_norm(f)) continue;
    if (f(mid, mid).real() > 0.0) f = -f;
    const auto [neg, pos] = hermitian_signature(f);
    if (neg == 1 && pos == m - 1) return f;
  }
  throw SignatureError(
      "no nondegenerate invariant form with one negative direction");
}

}  // namespace detail

// Read a surface sample off the frame field at one spectral value. Purely
// imaginary values give real unit vectors: the frame value there is real
// orthogonal and the sample is its middle column. Unit-circle values give
// complex columns, certified against a signature (m - 1, 1) Hermitian form
// identified from the data and preserved by every frame value.
inline SurfaceSample extract_immersion(const GridFrame& frame, Complex lambda0,
                                       double tol = 1e-8) {
  frame.grid.validate();
  if (frame.values.size() != static_cast<std::size_t>(frame.grid.total()))
    throw ParameterViolationError("frame values do not cover the grid");
  const int m = frame.form.size;
  const int mid = frame.block_n;
  const double r0 = std::abs(lambda0);
  if (!(r0 > 0.0))
    throw ParameterViolationError("spectral value must be nonzero");
  SurfaceSample out;
  out.grid = frame.grid;
  out.lambda0 = lambda0;
  out.ambient = m;
  if (std::abs(lambda0.real()) <= 1e-12 * r0) {
    out.sphere = true;
    out.points.reserve(frame.values.size());
    for (const LaurentLoop& v : frame.values) {
      const Mat e = eval(v, lambda0);
      const Eigen::VectorXcd col = e.col(mid);
      const Eigen::VectorXd p = col.real();
      const double d = std::max(col.imag().cwiseAbs().maxCoeff(),
                                std::abs(p.norm() - 1.0));
      if (d > tol)
        throw NormCertificateError("surface point is not a real unit vector",
                                   d);
      out.point_residual = std::max(out.point_residual, d);
      out.points.push_back(p);
    }
    return out;
  }
  if (std::abs(r0 - 1.0) > 1e-12)
    throw ParameterViolationError(
        "spectral value must be purely imaginary or on the unit circle");
  std::vector<Mat> evals;
  evals.reserve(frame.values.size());
  out.columns.reserve(frame.values.size());
  for (const LaurentLoop& v : frame.values) {
    evals.push_back(eval(v, lambda0));
    out.columns.push_back(evals.back().col(mid));
  }
  const long total = static_cast<long>(evals.size());
  const int want = static_cast<int>(std::min<long>(total, 16));
  std::vector<Mat> probe;
  probe.reserve(static_cast<std::size_t>(want));
  for (int j = 0; j < want; ++j) {
    const long pick = (want == 1) ? 0 : (j * (total - 1)) / (want - 1);
    probe.push_back(evals[static_cast<std::size_t>(pick)]);
  }
  Mat inv = detail::identify_invariant_form(probe, m, mid);
  if (std::abs(inv(mid, mid).real()) <= 1e-8 * op_norm(inv))
    throw SignatureError("identified form vanishes on the middle direction");
  inv *= Complex(-1.0 / inv(mid, mid).real(), 0.0);
  const std::pair<int, int> sig = detail::hermitian_signature(inv);
  if (sig.first != 1 || sig.second != m - 1)
    throw SignatureError("identified form does not have signature (m-1, 1)");
  out.invariant = inv;
  for (const Mat& e : evals)
    out.invariant_residual =
        std::max(out.invariant_residual,
                 op_norm(Mat(e.adjoint() * inv * e - inv)));
  for (const Eigen::VectorXcd& c : out.columns)
    out.point_residual =
        std::max(out.point_residual,
                 std::abs((c.adjoint() * inv * c).value() - inv(mid, mid)));
  return out;
}

// ---------------------------------------------------------------------------
// Gauss curvature from the first fundamental form alone, with fourth-order
// centred stencils. Metric entries live on a margin-2 window of the grid
// and curvature on a margin-4 window, so each axis needs at least nine
// samples. Points whose metric determinant falls below 1e-8 of the squared
// global metric scale are excluded as degenerate.

struct CurvatureReport {
  std::vector<double> values;
  double mean = 0.0;
  double stddev = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
  long used = 0;
  long excluded = 0;
};

inline CurvatureReport curvature_report(const SurfaceSample& s) {
  if (!s.sphere)
    throw ParameterViolationError("curvature report needs real point samples");
  if (s.grid.dim() != 2)
    throw ParameterViolationError("curvature report needs a two-axis grid");
  const int c0 = s.grid.counts[0];
  const int c1 = s.grid.counts[1];
  if (c0 < 9 || c1 < 9)
    throw ParameterViolationError(
        "fourth-order curvature stencils need at least 9 samples per axis");
  if (s.points.size() != static_cast<std::size_t>(s.grid.total()))
    throw ParameterViolationError("sample points do not cover the grid");
  const double h = s.grid.spacing;
  auto P = [&](int i, int j) -> const Eigen::VectorXd& {
    return s.points[static_cast<std::size_t>(i) * c1 + j];
  };
  auto idx = [&](int i, int j) {
    return static_cast<std::size_t>(i) * c1 + j;
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> E(static_cast<std::size_t>(c0) * c1, nan);
  std::vector<double> F(E.size(), nan);
  std::vector<double> G(E.size(), nan);
  // Tangents below 1e-6 of the ambient scale per grid step are
  // indistinguishable from certificate noise; such patches count as
  // degenerate even if the determinant is nonzero relative to itself.
  double ambient = 0.0;
  for (const Eigen::VectorXd& p : s.points)
    ambient = std::max(ambient, p.norm());
  double scale = std::pow(1e-6 * ambient / h, 2);
  for (int i = 2; i < c0 - 2; ++i)
    for (int j = 2; j < c1 - 2; ++j) {
      const Eigen::VectorXd pu = (-P(i + 2, j) + 8.0 * P(i + 1, j) -
                                  8.0 * P(i - 1, j) + P(i - 2, j)) /
                                 (12.0 * h);
      const Eigen::VectorXd pv = (-P(i, j + 2) + 8.0 * P(i, j + 1) -
                                  8.0 * P(i, j - 1) + P(i, j - 2)) /
                                 (12.0 * h);
      E[idx(i, j)] = pu.dot(pu);
      F[idx(i, j)] = pu.dot(pv);
      G[idx(i, j)] = pv.dot(pv);
      scale = std::max({scale, E[idx(i, j)], G[idx(i, j)]});
    }
  auto du = [&](const std::vector<double>& f, int i, int j) {
    return (-f[idx(i + 2, j)] + 8.0 * f[idx(i + 1, j)] -
            8.0 * f[idx(i - 1, j)] + f[idx(i - 2, j)]) /
           (12.0 * h);
  };
  auto dv = [&](const std::vector<double>& f, int i, int j) {
    return (-f[idx(i, j + 2)] + 8.0 * f[idx(i, j + 1)] -
            8.0 * f[idx(i, j - 1)] + f[idx(i, j - 2)]) /
           (12.0 * h);
  };
  auto duu = [&](const std::vector<double>& f, int i, int j) {
    return (-f[idx(i + 2, j)] + 16.0 * f[idx(i + 1, j)] - 30.0 * f[idx(i, j)] +
            16.0 * f[idx(i - 1, j)] - f[idx(i - 2, j)]) /
           (12.0 * h * h);
  };
  auto dvv = [&](const std::vector<double>& f, int i, int j) {
    return (-f[idx(i, j + 2)] + 16.0 * f[idx(i, j + 1)] - 30.0 * f[idx(i, j)] +
            16.0 * f[idx(i, j - 1)] - f[idx(i, j - 2)]) /
           (12.0 * h * h);
  };
  auto duv = [&](const std::vector<double>& f, int i, int j) {
    return (-dv(f, i + 2, j) + 8.0 * dv(f, i + 1, j) - 8.0 * dv(f, i - 1, j) +
            dv(f, i - 2, j)) /
           (12.0 * h);
  };
  CurvatureReport rep;
  for (int i = 4; i < c0 - 4; ++i)
    for (int j = 4; j < c1 - 4; ++j) {
      const double e = E[idx(i, j)];
      const double f = F[idx(i, j)];
      const double g = G[idx(i, j)];
      const double det = e * g - f * f;
      if (det <= 1e-8 * scale * scale) {
        ++rep.excluded;
        continue;
      }
      Eigen::Matrix3d m1, m2;
      m1 << -0.5 * dvv(E, i, j) + duv(F, i, j) - 0.5 * duu(G, i, j),
          0.5 * du(E, i, j), du(F, i, j) - 0.5 * dv(E, i, j),
          dv(F, i, j) - 0.5 * du(G, i, j), e, f,
          0.5 * dv(G, i, j), f, g;
      m2 << 0.0, 0.5 * dv(E, i, j), 0.5 * du(G, i, j),
          0.5 * dv(E, i, j), e, f,
          0.5 * du(G, i, j), f, g;
      rep.values.push_back((m1.determinant() - m2.determinant()) /
                           (det * det));
    }
  if (rep.values.empty())
    throw DegenerateMetricError(
        "no curvature stencil produced a nondegenerate metric");
  rep.used = static_cast<long>(rep.values.size());
  double sum = 0.0;
  rep.min_value = rep.values.front();
  rep.max_value = rep.values.front();
  for (double v : rep.values) {
    sum += v;
    rep.min_value = std::min(rep.min_value, v);
    rep.max_value = std::max(rep.max_value, v);
  }
  rep.mean = sum / static_cast<double>(rep.used);
  double var = 0.0;
  for (double v : rep.values) var += (v - rep.mean) * (v - rep.mean);
  rep.stddev = std::sqrt(var / static_cast<double>(rep.used));
  return rep;
}

}  // namespace loopfact
