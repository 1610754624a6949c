#include "switchback/error.hpp"

namespace switchback {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EmptyPoints: return "EmptyPoints";
        case ErrorCode::FirstPointNotOne: return "FirstPointNotOne";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::NotStrictlyIncreasing: return "NotStrictlyIncreasing";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::TooManyCoins: return "TooManyCoins";
        case ErrorCode::PeriodOutOfRange: return "PeriodOutOfRange";
        case ErrorCode::WindowUnderflow: return "WindowUnderflow";
        case ErrorCode::MissingEntry: return "MissingEntry";
        case ErrorCode::OrderTooSmall: return "OrderTooSmall";
        case ErrorCode::OrderNotUnderestimated: return "OrderNotUnderestimated";
        case ErrorCode::NonpositiveBound: return "NonpositiveBound";
        case ErrorCode::OrderMismatch: return "OrderMismatch";
        case ErrorCode::NotPersistent: return "NotPersistent";
        case ErrorCode::HorizonTooShort: return "HorizonTooShort";
        case ErrorCode::HorizonTooLarge: return "HorizonTooLarge";
        case ErrorCode::InvalidPath: return "InvalidPath";
        case ErrorCode::PreconditionViolated: return "PreconditionViolated";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::BadLevel: return "BadLevel";
        case ErrorCode::EmptyGrid: return "EmptyGrid";
        case ErrorCode::NoPointAccepted: return "NoPointAccepted";
        case ErrorCode::OrderNotIncreasing: return "OrderNotIncreasing";
        case ErrorCode::RunnerFailure: return "RunnerFailure";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

}  // namespace switchback
