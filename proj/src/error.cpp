#include "qkfe/error.hpp"

namespace qkfe {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidLattice: return "InvalidLattice";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::NonBipartite: return "NonBipartite";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::WindowViolation: return "WindowViolation";
    case ErrorCode::NonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::BadTarget: return "BadTarget";
    case ErrorCode::UnsupportedModel: return "UnsupportedModel";
    case ErrorCode::BadSchedule: return "BadSchedule";
    case ErrorCode::NonPositiveX: return "NonPositiveX";
    case ErrorCode::NegativeArgument: return "NegativeArgument";
    case ErrorCode::ProtocolInvalid: return "ProtocolInvalid";
    case ErrorCode::ReferenceNotEigenstate: return "ReferenceNotEigenstate";
    case ErrorCode::BadProductState: return "BadProductState";
    case ErrorCode::NotInvertibleByRzFlip: return "NotInvertibleByRzFlip";
    case ErrorCode::DegenerateEstimator: return "DegenerateEstimator";
    case ErrorCode::TotalDepolarization: return "TotalDepolarization";
    case ErrorCode::DegeneratePair: return "DegeneratePair";
    case ErrorCode::DivByZeroEstimation: return "DivByZeroEstimation";
    case ErrorCode::TooFewValues: return "TooFewValues";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace qkfe
