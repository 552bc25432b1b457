#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tvp {

/// Failure categories raised by the library. The CLI maps these to exit codes.
enum class ErrorKind {
    // data / validation
    MalformedInput,
    MissingValue,
    GapInDates,
    NonPositiveLevel,
    DuplicateDate,
    TooShort,
    OutOfRange,
    LengthMismatch,
    InvalidArgument,
    // estimation
    DegenerateRegressor,
    DegenerateDesign,
    UnsupportedCase,
    NonFiniteState,
    EmptySeries,
    MismatchedOutput,
    NoConvergence,
    NonFiniteObjective,
    SectionMissing,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

/// True for kinds caused by bad input data rather than a failed estimation.
[[nodiscard]] bool is_data_error(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace tvp
