#pragma once

// Matrix-valued finite Laurent series on the unit circle, with exact
// coefficient arithmetic and a sampled dual view on power-of-two grids.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/MatrixFunctions>

#include "loopfact/errors.hpp"
#include "loopfact/matrix.hpp"

namespace loopfact {

class LaurentLoop {
 public:
  LaurentLoop(int size, int d_min, std::vector<Mat> coeffs)
      : size_(size), d_min_(d_min), coeffs_(std::move(coeffs)) {
    if (size_ <= 0) throw ParameterViolationError("loop size must be positive");
    if (coeffs_.empty()) {
      d_min_ = 0;
      coeffs_.push_back(Mat::Zero(size_, size_));
    }
    for (const Mat& c : coeffs_)
      if (c.rows() != size_ || c.cols() != size_)
        throw ParameterViolationError("coefficient shape mismatch");
  }

  static LaurentLoop zero(int size) {
    return LaurentLoop(size, 0, {Mat::Zero(size, size)});
  }
  static LaurentLoop identity(int size) {
    return LaurentLoop(size, 0, {Mat::Identity(size, size)});
  }
  static LaurentLoop constant(const Mat& m) {
    return LaurentLoop(static_cast<int>(m.rows()), 0, {m});
  }
  static LaurentLoop monomial(const Mat& m, int degree) {
    return LaurentLoop(static_cast<int>(m.rows()), degree, {m});
  }

  int size() const { return size_; }
  int d_min() const { return d_min_; }
  int d_max() const { return d_min_ + static_cast<int>(coeffs_.size()) - 1; }
  int term_count() const { return static_cast<int>(coeffs_.size()); }

  bool in_window(int d) const { return d >= d_min() && d <= d_max(); }

  Mat coeff(int d) const {
    if (!in_window(d)) return Mat::Zero(size_, size_);
    return coeffs_[d - d_min_];
  }

  const std::vector<Mat>& coeffs() const { return coeffs_; }

  void set_coeff(int d, const Mat& m) {
    if (m.rows() != size_ || m.cols() != size_)
      throw ParameterViolationError("coefficient shape mismatch");
    if (d < d_min_) {
      coeffs_.insert(coeffs_.begin(), d_min_ - d, Mat::Zero(size_, size_));
      d_min_ = d;
    } else if (d > d_max()) {
      coeffs_.insert(coeffs_.end(), d - d_max(), Mat::Zero(size_, size_));
    }
    coeffs_[d - d_min_] = m;
  }

  void add_to_coeff(int d, const Mat& m) { set_coeff(d, coeff(d) + m); }

 private:
  int size_;
  int d_min_;
  std::vector<Mat> coeffs_;
};

// ---------------------------------------------------------------------------
// Evaluation and coefficient arithmetic.

inline Mat eval(const LaurentLoop& x, Complex lambda) {
  const int n = x.size();
  Mat pos = Mat::Zero(n, n);
  if (x.d_max() >= 0) {
    for (int d = x.d_max(); d >= 0; --d) pos = pos * lambda + x.coeff(d);
  }
  Mat neg = Mat::Zero(n, n);
  if (x.d_min() < 0) {
    const Complex mu = 1.0 / lambda;
    for (int d = x.d_min(); d <= -1; ++d) neg = neg * mu + x.coeff(d);
    neg = neg * mu;
  }
  return pos + neg;
}

inline LaurentLoop add(const LaurentLoop& a, const LaurentLoop& b) {
  if (a.size() != b.size()) throw ParameterViolationError("size mismatch in add");
  const int lo = std::min(a.d_min(), b.d_min());
  const int hi = std::max(a.d_max(), b.d_max());
  std::vector<Mat> c;
  c.reserve(hi - lo + 1);
  for (int d = lo; d <= hi; ++d) c.push_back(a.coeff(d) + b.coeff(d));
  return LaurentLoop(a.size(), lo, std::move(c));
}

inline LaurentLoop sub(const LaurentLoop& a, const LaurentLoop& b) {
  if (a.size() != b.size()) throw ParameterViolationError("size mismatch in sub");
  const int lo = std::min(a.d_min(), b.d_min());
  const int hi = std::max(a.d_max(), b.d_max());
  std::vector<Mat> c;
  c.reserve(hi - lo + 1);
  for (int d = lo; d <= hi; ++d) c.push_back(a.coeff(d) - b.coeff(d));
  return LaurentLoop(a.size(), lo, std::move(c));
}

inline LaurentLoop scale(const LaurentLoop& a, Complex s) {
  std::vector<Mat> c;
  c.reserve(a.term_count());
  for (const Mat& m : a.coeffs()) c.push_back(s * m);
  return LaurentLoop(a.size(), a.d_min(), std::move(c));
}

// Exact Cauchy product; the result window is the sum of the input windows.
inline LaurentLoop multiply(const LaurentLoop& a, const LaurentLoop& b) {
  if (a.size() != b.size())
    throw ParameterViolationError("size mismatch in multiply");
  const int n = a.size();
  const int lo = a.d_min() + b.d_min();
  const int hi = a.d_max() + b.d_max();
  std::vector<Mat> c(hi - lo + 1, Mat::Zero(n, n));
  for (int da = a.d_min(); da <= a.d_max(); ++da) {
    const Mat& ca = a.coeff(da);
    if (ca.isZero(0.0)) continue;
    for (int db = b.d_min(); db <= b.d_max(); ++db)
      c[da + db - lo] += ca * b.coeff(db);
  }
  return LaurentLoop(n, lo, std::move(c));
}

// Degree shift: multiply by lambda^k.
inline LaurentLoop shift(const LaurentLoop& a, int k) {
  return LaurentLoop(a.size(), a.d_min() + k, a.coeffs());
}

// Parameter substitution lambda -> omega * lambda.
inline LaurentLoop rotate_param(const LaurentLoop& a, Complex omega) {
  std::vector<Mat> c;
  c.reserve(a.term_count());
  for (int d = a.d_min(); d <= a.d_max(); ++d)
    c.push_back(std::pow(omega, d) * a.coeff(d));
  return LaurentLoop(a.size(), a.d_min(), std::move(c));
}

// Parameter substitution lambda -> 1/lambda: the window reverses.
inline LaurentLoop reverse_degrees(const LaurentLoop& a) {
  std::vector<Mat> c;
  c.reserve(a.term_count());
  for (int d = a.d_max(); d >= a.d_min(); --d) c.push_back(a.coeff(d));
  return LaurentLoop(a.size(), -a.d_max(), std::move(c));
}

// x(lambda) -> conj(x(conj(lambda))): entrywise conjugation per degree.
inline LaurentLoop conj_entries(const LaurentLoop& a) {
  std::vector<Mat> c;
  c.reserve(a.term_count());
  for (const Mat& m : a.coeffs()) c.push_back(m.conjugate());
  return LaurentLoop(a.size(), a.d_min(), std::move(c));
}

inline LaurentLoop transpose_coeffs(const LaurentLoop& a) {
  std::vector<Mat> c;
  c.reserve(a.term_count());
  for (const Mat& m : a.coeffs()) c.push_back(m.transpose());
  return LaurentLoop(a.size(), a.d_min(), std::move(c));
}

inline LaurentLoop adjoint_coeffs(const LaurentLoop& a) {
  std::vector<Mat> c;
  c.reserve(a.term_count());
  for (const Mat& m : a.coeffs()) c.push_back(m.adjoint());
  return LaurentLoop(a.size(), a.d_min(), std::move(c));
}

// Circle adjoint: on |lambda| = 1 the pointwise conjugate transpose of a
// loop is again a Laurent polynomial, with the degree-d coefficient mapped
// to eps^d times its conjugate transpose. eval(star(x), lambda) equals the
// conjugate transpose of eval(x, eps*conj(lambda)) there.
inline LaurentLoop star(const LaurentLoop& a, int eps = 1) {
  if (eps != 1 && eps != -1)
    throw ParameterViolationError("star rotation must be +1 or -1");
  std::vector<Mat> c;
  c.reserve(a.term_count());
  for (int d = a.d_min(); d <= a.d_max(); ++d)
    c.push_back((eps == 1 || d % 2 == 0) ? Mat(a.coeff(d).adjoint())
                                         : Mat(-a.coeff(d).adjoint()));
  return LaurentLoop(a.size(), a.d_min(), std::move(c));
}

inline LaurentLoop conjugate_by(const Mat& q, const LaurentLoop& a) {
  std::vector<Mat> c;
  c.reserve(a.term_count());
  for (const Mat& m : a.coeffs()) c.push_back(q * m * q.inverse());
  return LaurentLoop(a.size(), a.d_min(), std::move(c));
}

inline double max_coeff_norm(const LaurentLoop& a) {
  double m = 0.0;
  for (const Mat& c : a.coeffs()) m = std::max(m, op_norm(c));
  return m;
}

inline double max_coeff_diff(const LaurentLoop& a, const LaurentLoop& b) {
  return max_coeff_norm(sub(a, b));
}

// ---------------------------------------------------------------------------
// Sampled view on the grid of N-th roots of unity.

inline Complex unit_root(int N, int j) {
  const double t = 2.0 * std::numbers::pi * static_cast<double>(j) /
                   static_cast<double>(N);
  return Complex(std::cos(t), std::sin(t));
}

// Power-of-two grid comfortably oversampling the coefficient window.
inline int default_grid(const LaurentLoop& x) {
  return next_pow2(std::max(16, 4 * x.term_count()));
}

// Exact values of x at the N-th roots of unity, any N >= 1.
inline std::vector<Mat> to_samples(const LaurentLoop& x, int N) {
  const int n = x.size();
  std::vector<Mat> bins(N, Mat::Zero(n, n));
  for (int d = x.d_min(); d <= x.d_max(); ++d)
    bins[((d % N) + N) % N] += x.coeff(d);
  Eigen::FFT<double> fft;
  std::vector<Mat> samples(N, Mat::Zero(n, n));
  std::vector<Complex> in(N), out(N);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      for (int k = 0; k < N; ++k) in[k] = bins[k](r, c);
      fft.inv(out, in);
      for (int j = 0; j < N; ++j) samples[j](r, c) = out[j] * static_cast<double>(N);
    }
  }
  return samples;
}

// Coefficients over a fixed window from samples; exact when the sampled
// function is a Laurent polynomial supported in a window of width <= N.
inline LaurentLoop from_samples(const std::vector<Mat>& samples, int size,
                                int d_min, int count) {
  const int N = static_cast<int>(samples.size());
  if (count > N)
    throw ParameterViolationError("window wider than sample grid");
  std::vector<Mat> bins(N, Mat::Zero(size, size));
  Eigen::FFT<double> fft;
  std::vector<Complex> in(N), out(N);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      for (int j = 0; j < N; ++j) in[j] = samples[j](r, c);
      fft.fwd(out, in);
      for (int k = 0; k < N; ++k) bins[k](r, c) = out[k] / static_cast<double>(N);
    }
  }
  std::vector<Mat> coeffs;
  coeffs.reserve(count);
  for (int d = d_min; d < d_min + count; ++d)
    coeffs.push_back(bins[((d % N) + N) % N]);
  return LaurentLoop(size, d_min, std::move(coeffs));
}

struct AutoWindowResult {
  LaurentLoop loop;
  double discarded;  // summed operator norm of the dropped bins
};

// Recover a loop from samples, choosing the smallest centered-unwrapped
// window whose complement carries relative mass at most tol. The halfwidth
// cap guards against spectra that do not decay on this grid.
// Raw DFT coefficients of equispaced circle samples; entry j holds the bin
// for degrees congruent to j mod N. No window decisions are made here.
inline std::vector<Mat> sample_bins(const std::vector<Mat>& samples,
                                    int size) {
  const int N = static_cast<int>(samples.size());
  std::vector<Mat> bins(N, Mat::Zero(size, size));
  Eigen::FFT<double> fft;
  std::vector<Complex> in(N), out(N);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      for (int j = 0; j < N; ++j) in[j] = samples[j](r, c);
      fft.fwd(out, in);
      for (int k = 0; k < N; ++k) bins[k](r, c) = out[k] / static_cast<double>(N);
    }
  }
  return bins;
}

inline AutoWindowResult from_samples_auto(const std::vector<Mat>& samples,
                                          int size, double tol,
                                          int cap_halfwidth) {
  const int N = static_cast<int>(samples.size());
  const std::vector<Mat> bins = sample_bins(samples, size);
  // Unwrap to degrees in [-N/2, N/2).
  const int lo = -N / 2;
  const int hi = N / 2 - 1;
  auto bin_at = [&](int d) -> const Mat& { return bins[((d % N) + N) % N]; };
  double scale = 0.0;
  for (const Mat& s : samples) scale = std::max(scale, op_norm(s));
  if (scale == 0.0) scale = 1.0;
  const double cut = tol * scale;
  int a = lo, b = hi;
  double dropped = 0.0;
  while (a < 0 && a < b) {
    const double m = op_norm(bin_at(a));
    if (dropped + m > cut) break;
    dropped += m;
    ++a;
  }
  while (b > 0 && b > a) {
    const double m = op_norm(bin_at(b));
    if (dropped + m > cut) break;
    dropped += m;
    --b;
  }
  if (-a > cap_halfwidth || b > cap_halfwidth) {
    double excess = 0.0;
    for (int d = lo; d < -cap_halfwidth; ++d) excess += op_norm(bin_at(d));
    for (int d = cap_halfwidth + 1; d <= hi; ++d) excess += op_norm(bin_at(d));
    throw TruncationResidualError(
        "sample spectrum does not fit the window cap", excess / scale);
  }
  std::vector<Mat> coeffs;
  coeffs.reserve(b - a + 1);
  for (int d = a; d <= b; ++d) coeffs.push_back(bin_at(d));
  return {LaurentLoop(size, a, std::move(coeffs)), dropped};
}

// ---------------------------------------------------------------------------
// Norms, truncation, windows.

// Max operator norm over a doubled default grid: a tight sampled stand-in
// for the sup over the circle.
inline double sup_norm(const LaurentLoop& x) {
  const int N = 2 * default_grid(x);
  double m = 0.0;
  for (const Mat& s : to_samples(x, N)) m = std::max(m, op_norm(s));
  return m;
}

struct TruncateResult {
  LaurentLoop loop;
  double discarded;  // summed operator norm of the dropped coefficients
};

inline TruncateResult truncate(const LaurentLoop& x, int d_min, int d_max) {
  if (d_min > d_max) throw ParameterViolationError("empty truncation window");
  double dropped = 0.0;
  for (int d = x.d_min(); d <= x.d_max(); ++d)
    if (d < d_min || d > d_max) dropped += op_norm(x.coeff(d));
  std::vector<Mat> c;
  c.reserve(d_max - d_min + 1);
  for (int d = d_min; d <= d_max; ++d) c.push_back(x.coeff(d));
  return {LaurentLoop(x.size(), d_min, std::move(c)), dropped};
}

// Drop negligible boundary coefficients; total dropped mass stays <= tol.
inline LaurentLoop tighten(const LaurentLoop& x, double tol) {
  int a = x.d_min(), b = x.d_max();
  double budget = tol;
  while (a < b) {
    const double m = op_norm(x.coeff(a));
    if (m > budget) break;
    budget -= m;
    ++a;
  }
  while (b > a) {
    const double m = op_norm(x.coeff(b));
    if (m > budget) break;
    budget -= m;
    --b;
  }
  return truncate(x, a, b).loop;
}

// ---------------------------------------------------------------------------
// Inversion on the sample grid.

struct InvertOptions {
  double singular_rel = 1e-14;   // per-sample smallest-singular-value floor
  double residual_tol = 1e-9;    // sup-sample product residual bound
  int grid = 0;                  // 0: derived from the output window
};

// Pointwise inverse resampled onto a fixed output window. Throws when a
// sample is numerically singular or when the window cannot carry the
// inverse to the requested residual.
inline LaurentLoop invert(const LaurentLoop& x, int out_d_min, int out_d_max,
                          const InvertOptions& opt = {}) {
  const int n = x.size();
  const int count = out_d_max - out_d_min + 1;
  int N = opt.grid;
  if (N == 0)
    N = next_pow2(std::max({16, 4 * count, 4 * x.term_count()}));
  const std::vector<Mat> samples = to_samples(x, N);
  double smax = 0.0;
  for (const Mat& s : samples) smax = std::max(smax, op_norm(s));
  std::vector<Mat> inv_samples(N);
  for (int j = 0; j < N; ++j) {
    const double smin = smallest_singular_value(samples[j]);
    if (smin <= opt.singular_rel * smax)
      throw SingularSampleError("loop is numerically singular on the circle");
    inv_samples[j] = samples[j].partialPivLu().inverse();
  }
  LaurentLoop y = from_samples(inv_samples, n, out_d_min, count);
  // Residual on the doubled grid, which interleaves fresh points.
  const int M = 2 * N;
  const std::vector<Mat> xs = to_samples(x, M);
  const std::vector<Mat> ys = to_samples(y, M);
  double achieved = 0.0;
  const Mat id = Mat::Identity(n, n);
  for (int j = 0; j < M; ++j)
    achieved = std::max(achieved, op_norm(xs[j] * ys[j] - id));
  if (achieved > opt.residual_tol)
    throw TruncationResidualError("inverse does not fit the requested window",
                                  achieved);
  return y;
}

// Pointwise inverse with an automatically chosen window.
inline LaurentLoop invert_auto(const LaurentLoop& x, double mass_tol,
                               int cap_halfwidth,
                               const InvertOptions& opt = {}) {
  const int n = x.size();
  int N = opt.grid;
  if (N == 0)
    N = next_pow2(std::max({64, 4 * x.term_count(), 4 * cap_halfwidth}));
  const std::vector<Mat> samples = to_samples(x, N);
  double smax = 0.0;
  for (const Mat& s : samples) smax = std::max(smax, op_norm(s));
  std::vector<Mat> inv_samples(N);
  for (int j = 0; j < N; ++j) {
    const double smin = smallest_singular_value(samples[j]);
    if (smin <= opt.singular_rel * smax)
      throw SingularSampleError("loop is numerically singular on the circle");
    inv_samples[j] = samples[j].partialPivLu().inverse();
  }
  return from_samples_auto(inv_samples, n, mass_tol, cap_halfwidth).loop;
}

// True when every sample of the loop is well-conditioned enough to invert.
inline bool is_group_valued(const LaurentLoop& x, double rel_tol = 1e-12) {
  const int N = next_pow2(std::max({16, 8 * x.size(), 4 * x.term_count()}));
  const std::vector<Mat> samples = to_samples(x, N);
  double smax = 0.0;
  for (const Mat& s : samples) smax = std::max(smax, op_norm(s));
  if (smax == 0.0) return false;
  for (const Mat& s : samples)
    if (smallest_singular_value(s) <= rel_tol * smax) return false;
  return true;
}

// Pointwise matrix exponential on an oversampled grid, window recovered by
// coefficient mass. Exact up to the reported mass: the exponential of a
// finite series has factorially decaying coefficients.
inline LaurentLoop exp_pointwise(const LaurentLoop& xi,
                                 double mass_tol = 1e-11) {
  const int halfw = std::max({1, -xi.d_min(), xi.d_max()});
  const int N = next_pow2(128 * (halfw + 1));
  const std::vector<Mat> xs = to_samples(xi, N);
  std::vector<Mat> gs(N);
  for (int j = 0; j < N; ++j) gs[j] = xs[j].exp();
  return from_samples_auto(gs, xi.size(), mass_tol, N / 4).loop;
}

// ---------------------------------------------------------------------------
// Winding number of det x around the circle.

// Accumulates argument increments of the sample-to-sample determinant
// ratios, refining the grid until every step is small and the total is
// close to an integer multiple of 2*pi.
inline int winding_det(const LaurentLoop& x, int max_grid = 1 << 15) {
  int N = std::max(64, default_grid(x));
  double frac = std::numeric_limits<double>::quiet_NaN();
  while (N <= max_grid) {
    const std::vector<Mat> samples = to_samples(x, N);
    std::vector<Complex> dets(N);
    double dmax = 0.0;
    bool degenerate = false;
    for (int j = 0; j < N; ++j) {
      dets[j] = samples[j].determinant();
      dmax = std::max(dmax, std::abs(dets[j]));
    }
    for (int j = 0; j < N; ++j)
      if (std::abs(dets[j]) <= 1e-13 * dmax) degenerate = true;
    if (!degenerate) {
      double total = 0.0;
      bool coarse = false;
      for (int j = 0; j < N; ++j) {
        const double step = std::arg(dets[(j + 1) % N] / dets[j]);
        if (std::abs(step) >= std::numbers::pi / 2) coarse = true;
        total += step;
      }
      const double turns = total / (2.0 * std::numbers::pi);
      const double rounded = std::round(turns);
      frac = std::abs(turns - rounded);
      if (!coarse && frac < 0.25) return static_cast<int>(rounded);
    }
    N *= 2;
  }
  throw AmbiguousWindingError(frac);
}

}  // namespace loopfact
