#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace switchback {

enum class ErrorCode {
    EmptyPoints,
    FirstPointNotOne,
    OutOfRange,
    NotStrictlyIncreasing,
    LengthMismatch,
    TooManyCoins,
    PeriodOutOfRange,
    WindowUnderflow,
    MissingEntry,
    OrderTooSmall,
    OrderNotUnderestimated,
    NonpositiveBound,
    OrderMismatch,
    NotPersistent,
    HorizonTooShort,
    HorizonTooLarge,
    InvalidPath,
    PreconditionViolated,
    ZeroVariance,
    BadLevel,
    EmptyGrid,
    NoPointAccepted,
    OrderNotIncreasing,
    RunnerFailure,
    ConfigInvalid,
    ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Validation failure raised by every public entry point. The CLI maps these
/// to exit status 2; anything else escaping is treated as an internal error.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace switchback
