#ifndef FSO_ERRORS_HPP
#define FSO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fso {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The argument sits exactly on a boundary whose value is known analytically
/// (e.g. v = 0 for the closed-form BER); callers should use the limit.
class BoundaryError : public DomainError {
 public:
  BoundaryError(const std::string& what, double limit)
      : DomainError(what), limit_(limit) {}
  double limit() const noexcept { return limit_; }

 private:
  double limit_;
};

/// A series lost too many digits to cancellation. The quadrature route of the
/// same quantity should be used instead.
class PrecisionLossError : public Error {
 public:
  PrecisionLossError(const std::string& what, double cancellation_ratio)
      : Error(what), ratio_(cancellation_ratio) {}
  double cancellation_ratio() const noexcept { return ratio_; }

 private:
  double ratio_;
};

/// An iterative numerical method stopped before meeting its tolerance.
/// Carries the best estimate obtained so far.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double best_estimate, double error_estimate)
      : Error(what), best_(best_estimate), err_(error_estimate) {}
  double best_estimate() const noexcept { return best_; }
  double error_estimate() const noexcept { return err_; }

 private:
  double best_;
  double err_;
};

/// An optimization problem has no admissible solution in the requested region.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fso

#endif  // FSO_ERRORS_HPP
