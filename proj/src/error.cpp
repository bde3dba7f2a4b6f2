#include "delaycert/error.hpp"

namespace delaycert {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidInterval: return "InvalidInterval";
    case ErrorCode::NonBracketedRoot: return "NonBracketedRoot";
    case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OrthogonalityViolation: return "OrthogonalityViolation";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::NotAWitness: return "NotAWitness";
    case ErrorCode::NonHomogeneous: return "NonHomogeneous";
    case ErrorCode::EmptyProblem: return "EmptyProblem";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::InfeasibleAtLo: return "InfeasibleAtLo";
    case ErrorCode::BracketInvalid: return "BracketInvalid";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DegenerateWindow: return "DegenerateWindow";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

} // namespace delaycert
