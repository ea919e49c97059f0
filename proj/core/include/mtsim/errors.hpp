#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mtsim {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: wrong dimensions, out-of-range indices, bad file contents.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition (e.g. fed an unsplit cost to
/// Share, bypassed capping, queried too many predictors).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// An instance exceeds the size guard of an exhaustive routine.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// A state sequence visits an INFEASIBLE state.
class InfeasibleTrajectoryError : public Error {
 public:
  InfeasibleTrajectoryError(std::size_t step, const std::string& what)
      : Error(what), step_(step) {}
  /// 0-based index of the first offending step.
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// A predictor sits on an INFEASIBLE state where a finite cost is required.
class InfeasiblePredictorError : public Error {
 public:
  InfeasiblePredictorError(std::size_t predictor, std::size_t step,
                           const std::string& what)
      : Error(what), predictor_(predictor), step_(step) {}
  std::size_t predictor() const noexcept { return predictor_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t predictor_;
  std::size_t step_;
};

/// No schedule of the benchmark has finite cost.
class InfeasibleBenchmarkError : public Error {
 public:
  using Error::Error;
};

}  // namespace mtsim
