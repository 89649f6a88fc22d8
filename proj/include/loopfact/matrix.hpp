#pragma once

// Shared dense-matrix aliases and small numeric helpers.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>

namespace loopfact {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using RealMat = Eigen::MatrixXd;

// Largest singular value; accepts any dense Eigen expression.
template <typename Derived>
double op_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.operatorNorm();
}

// Smallest singular value; 0x0 matrices have none, treat as +inf.
inline double smallest_singular_value(const Mat& m) {
  if (m.rows() == 0 || m.cols() == 0) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

inline bool is_identity(const Mat& m, double tol) {
  return op_norm(m - Mat::Identity(m.rows(), m.cols())) <= tol;
}

// Deterministic stream of draws; everything downstream takes explicit seeds.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double normal() { return normal_(gen_); }
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * unif_(gen_);
  }
  std::uint64_t next_seed() { return gen_(); }

  Complex cnormal() {
    double re = normal();
    double im = normal();
    return Complex(re, im);
  }

  Mat complex_gaussian(int rows, int cols) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = cnormal();
    return m;
  }

  RealMat real_gaussian(int rows, int cols) {
    RealMat m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

  // Haar-ish special-orthogonal matrix via QR of a Gaussian draw.
  RealMat special_orthogonal(int n) {
    RealMat g = real_gaussian(n, n);
    Eigen::HouseholderQR<RealMat> qr(g);
    RealMat q = qr.householderQ();
    RealMat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i)
      if (r(i, i) < 0) q.col(i) *= -1.0;
    if (q.determinant() < 0) q.col(n - 1) *= -1.0;
    return q;
  }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

inline int next_pow2(int v) {
  int p = 1;
  while (p < v) p <<= 1;
  return p;
}

}  // namespace loopfact
