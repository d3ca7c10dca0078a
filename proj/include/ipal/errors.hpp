#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ipal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An objective oracle returned (or was given) non-finite values.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::vector<Eigen::Index> coordinates)
      : Error(what), coordinates_(std::move(coordinates)) {}

  /// Zero-based indices of the offending coordinates.
  const std::vector<Eigen::Index>& coordinates() const { return coordinates_; }

 private:
  std::vector<Eigen::Index> coordinates_;
};

/// An optional oracle (Hessian-vector product) is required but missing.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Vector or matrix shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A point lies outside the domain of an operation, e.g. x_i <= 0 for i < s.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, Eigen::Index index = -1)
      : Error(what), index_(index) {}

  /// Offending zero-based coordinate, or -1 when not tied to a coordinate.
  Eigen::Index index() const { return index_; }

 private:
  Eigen::Index index_;
};

/// Unknown builtin name or similar lookup failure.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver did not reach its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}

  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// A dense system was singular or too ill-conditioned to trust.
class SingularSystemError : public Error {
 public:
  SingularSystemError(const std::string& what, double condition_estimate)
      : Error(what), condition_estimate_(condition_estimate) {}

  double condition_estimate() const { return condition_estimate_; }

 private:
  double condition_estimate_;
};

/// A caller-side precondition (e.g. feasibility of a start point) failed.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace ipal
