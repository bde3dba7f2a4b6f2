#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace delaycert {

enum class ErrorCode {
    InvalidInterval,
    NonBracketedRoot,
    ToleranceNotMet,
    DimensionMismatch,
    OrthogonalityViolation,
    IndexOutOfRange,
    InvalidParams,
    InvalidModel,
    NotAWitness,
    NonHomogeneous,
    EmptyProblem,
    NumericalFailure,
    InfeasibleAtLo,
    BracketInvalid,
    StepTooLarge,
    NonFinite,
    DegenerateWindow,
    ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace delaycert
