#pragma once

// Error taxonomy. Every failure a caller can act on gets its own type;
// messages carry the achieved quantity so logs are self-explanatory.

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace loopfact {

// Outcome of probing whether a loop admits the unobstructed two-sided
// splitting at truncation order m.
struct CellReport {
  bool in_big_cell = false;
  int det_winding = 0;
  double smallest_singular_value = 0.0;
  double scale = 0.0;
  int truncation = 0;
};

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : Error {
  using Error::Error;
};

// A sample point on the circle where a matrix that must be inverted is
// numerically singular.
struct SingularSampleError : Error {
  explicit SingularSampleError(const std::string& msg) : Error(msg) {}
};

// Coefficient mass outside the requested window exceeded the tolerance.
struct TruncationResidualError : Error {
  double achieved;
  TruncationResidualError(const std::string& msg, double got)
      : Error(msg + " (achieved " + std::to_string(got) + ")"), achieved(got) {}
};

// Winding count could not be rounded to an integer with a safe margin.
struct AmbiguousWindingError : Error {
  double fractional_part;
  AmbiguousWindingError(double frac)
      : Error("winding number ambiguous, fractional part " + std::to_string(frac)),
        fractional_part(frac) {}
};

struct NotInBigCellError : Error {
  CellReport report;
  explicit NotInBigCellError(CellReport r)
      : Error("loop is not in the big cell (winding " + std::to_string(r.det_winding) +
              ", smin " + std::to_string(r.smallest_singular_value) + ")"),
        report(r) {}
};

struct ResidualTooLargeError : Error {
  double achieved;
  ResidualTooLargeError(const std::string& msg, double got)
      : Error(msg + " (achieved " + std::to_string(got) + ")"), achieved(got) {}
};

struct FormViolationError : Error {
  double achieved;
  FormViolationError(const std::string& msg, double got)
      : Error(msg + " (fixed-point residual " + std::to_string(got) + ")"), achieved(got) {}
};

struct FactorFormViolationError : Error {
  double achieved;
  FactorFormViolationError(const std::string& msg, double got)
      : Error(msg + " (fixed-point residual " + std::to_string(got) + ")"), achieved(got) {}
};

// Splitting step inside the symmetric factorization failed.
struct BirkhoffSingularError : Error {
  CellReport report;
  explicit BirkhoffSingularError(CellReport r)
      : Error("inner two-sided splitting failed (winding " + std::to_string(r.det_winding) +
              ", smin " + std::to_string(r.smallest_singular_value) + ")"),
        report(r) {}
};

// The constant factor's spectrum touches the closed negative real axis, so
// the principal square root is undefined. Carries the spectrum; never
// silently switches branch.
struct LogBranchFailureError : Error {
  std::vector<std::complex<double>> spectrum;
  explicit LogBranchFailureError(std::vector<std::complex<double>> eigs)
      : Error("principal logarithm undefined: eigenvalue on the closed negative real axis"),
        spectrum(std::move(eigs)) {}
};

struct SymmetryResidualError : Error {
  double achieved;
  SymmetryResidualError(const std::string& msg, double got)
      : Error(msg + " (residual " + std::to_string(got) + ")"), achieved(got) {}
};

struct NonCanonicalError : Error {
  using Error::Error;
};

struct NotConstantError : Error {
  double variation;
  NotConstantError(double var)
      : Error("quotient of the two symmetric factors is not constant in the loop parameter "
              "(variation " + std::to_string(var) + ")"),
        variation(var) {}
};

struct WrongSidedInputError : Error {
  using Error::Error;
};

struct NoAbelianFamilyError : Error {
  using Error::Error;
};

struct ParameterViolationError : Error {
  using Error::Error;
};

struct NormCertificateError : Error {
  double achieved;
  NormCertificateError(const std::string& msg, double got)
      : Error(msg + " (residual " + std::to_string(got) + ")"), achieved(got) {}
};

struct SignatureError : Error {
  using Error::Error;
};

struct DegenerateMetricError : Error {
  using Error::Error;
};

}  // namespace loopfact
