#include "tvp/error.hpp"

namespace tvp {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::MalformedInput: return "MalformedInput";
        case ErrorKind::MissingValue: return "MissingValue";
        case ErrorKind::GapInDates: return "GapInDates";
        case ErrorKind::NonPositiveLevel: return "NonPositiveLevel";
        case ErrorKind::DuplicateDate: return "DuplicateDate";
        case ErrorKind::TooShort: return "TooShort";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::DegenerateRegressor: return "DegenerateRegressor";
        case ErrorKind::DegenerateDesign: return "DegenerateDesign";
        case ErrorKind::UnsupportedCase: return "UnsupportedCase";
        case ErrorKind::NonFiniteState: return "NonFiniteState";
        case ErrorKind::EmptySeries: return "EmptySeries";
        case ErrorKind::MismatchedOutput: return "MismatchedOutput";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::NonFiniteObjective: return "NonFiniteObjective";
        case ErrorKind::SectionMissing: return "SectionMissing";
    }
    return "Unknown";
}

bool is_data_error(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::MalformedInput:
        case ErrorKind::MissingValue:
        case ErrorKind::GapInDates:
        case ErrorKind::NonPositiveLevel:
        case ErrorKind::DuplicateDate:
        case ErrorKind::TooShort:
        case ErrorKind::OutOfRange:
        case ErrorKind::LengthMismatch:
        case ErrorKind::InvalidArgument:
        case ErrorKind::EmptySeries:
            return true;
        default:
            return false;
    }
}

}  // namespace tvp
