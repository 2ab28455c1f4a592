#pragma once

#include <stdexcept>
#include <string>

namespace slimtsf {

enum class ErrorKind {
    MissingFile,
    SchemaViolation,
    NonMonotonicTimestamps,
    UnknownCategory,
    InsufficientCoverage,
    ExcessiveGap,
    EmptyResult,
    IndexOutOfRange,
    DegenerateInterval,
    NoValidIntervals,
    EmptyNode,
    SingleClassInput,
    SingleClassResample,
    EmptyMatrix,
    DimensionMismatch,
    LengthMismatch,
    EmptyInput,
    InconsistentDimensions,
    NoValidCells,
    InvalidConfig,
    InvalidSpec,
    IoFailure,
};

const char* to_string(ErrorKind kind);

/// Library-wide exception. `kind()` is stable and machine-readable; the CLI
/// maps it onto the error JSON it prints on stderr. what() carries the kind
/// prefix, message() just the detail text.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message),
          kind_(kind),
          message_(message) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& message() const noexcept { return message_; }

private:
    ErrorKind kind_;
    std::string message_;
};

}  // namespace slimtsf
