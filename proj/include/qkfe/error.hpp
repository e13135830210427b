#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qkfe {

enum class ErrorCode {
  InvalidLattice,
  MissingField,
  NonBipartite,
  TooLarge,
  WindowViolation,
  NonPositiveTemperature,
  BadTarget,
  UnsupportedModel,
  BadSchedule,
  NonPositiveX,
  NegativeArgument,
  ProtocolInvalid,
  ReferenceNotEigenstate,
  BadProductState,
  NotInvertibleByRzFlip,
  DegenerateEstimator,
  TotalDepolarization,
  DegeneratePair,
  DivByZeroEstimation,
  TooFewValues,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view error_code_name(ErrorCode code);

/// Every failure in the library is reported through this type; `code()` is
/// stable and is what the CLI writes into its machine-readable error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// NegativeArgument carries the temperature at which the reconstructed
/// partition sum stopped being positive.
class NegativeArgumentError : public Error {
 public:
  NegativeArgumentError(double temperature, const std::string& message)
      : Error(ErrorCode::NegativeArgument, message), temperature_(temperature) {}

  double temperature() const noexcept { return temperature_; }

 private:
  double temperature_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace qkfe
