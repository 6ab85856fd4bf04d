#pragma once

#include <stdexcept>
#include <string>

namespace mcltsgd {

// Base class for all toolkit failures so callers can catch one type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Input matrix is not symmetric within the relative tolerance.
class NotSymmetric : public Error {
 public:
  explicit NotSymmetric(const std::string& what) : Error(what) {}
};

// Symmetric input fails the positive-definiteness threshold.
class NotPositiveDefinite : public Error {
 public:
  explicit NotPositiveDefinite(const std::string& what) : Error(what) {}
};

// First step of the linear iteration would overshoot (eta_1 * lambda_max > 1).
class StepTooLarge : public Error {
 public:
  explicit StepTooLarge(const std::string& what) : Error(what) {}
};

// A trajectory exceeded the residual-norm guard.
class DivergenceDetected : public Error {
 public:
  explicit DivergenceDetected(const std::string& what) : Error(what) {}
};

// Partial-sum indices violate 1 <= j <= i.
class IndexOrder : public Error {
 public:
  explicit IndexOrder(const std::string& what) : Error(what) {}
};

// Exact ledger construction was asked for an infeasible horizon.
class HorizonTooLarge : public Error {
 public:
  explicit HorizonTooLarge(const std::string& what) : Error(what) {}
};

// The test function lacks the smoothness constant a bound requires.
class InvalidSmoothness : public Error {
 public:
  explicit InvalidSmoothness(const std::string& what) : Error(what) {}
};

// Quadrature reference requested above the supported dimension.
class DimTooLargeForQuadrature : public Error {
 public:
  explicit DimTooLargeForQuadrature(const std::string& what) : Error(what) {}
};

// Sample statistics need at least two replications.
class InsufficientReplications : public Error {
 public:
  explicit InsufficientReplications(const std::string& what) : Error(what) {}
};

// No reference expectation is available for the requested setup.
class ReferenceUnavailable : public Error {
 public:
  explicit ReferenceUnavailable(const std::string& what) : Error(what) {}
};

// Adaptive quadrature failed to reach its tolerance after refinement.
class QuadratureNotConverged : public Error {
 public:
  explicit QuadratureNotConverged(const std::string& what) : Error(what) {}
};

// Exact enumeration would exceed the configured path budget, or the model
// does not have finite per-step support.
class SupportTooLarge : public Error {
 public:
  explicit SupportTooLarge(const std::string& what) : Error(what) {}
};

// A partial covariance tail P_k is not positive definite.
class SingularTail : public Error {
 public:
  explicit SingularTail(const std::string& what) : Error(what) {}
};

// A declared moment constant is outside its admissible range.
class InvalidMoment : public Error {
 public:
  explicit InvalidMoment(const std::string& what) : Error(what) {}
};

// Experiment configuration failed schema validation.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace mcltsgd
