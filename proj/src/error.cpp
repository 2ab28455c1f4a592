#include "slimtsf/error.hpp"

namespace slimtsf {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MissingFile: return "MissingFile";
        case ErrorKind::SchemaViolation: return "SchemaViolation";
        case ErrorKind::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
        case ErrorKind::UnknownCategory: return "UnknownCategory";
        case ErrorKind::InsufficientCoverage: return "InsufficientCoverage";
        case ErrorKind::ExcessiveGap: return "ExcessiveGap";
        case ErrorKind::EmptyResult: return "EmptyResult";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::DegenerateInterval: return "DegenerateInterval";
        case ErrorKind::NoValidIntervals: return "NoValidIntervals";
        case ErrorKind::EmptyNode: return "EmptyNode";
        case ErrorKind::SingleClassInput: return "SingleClassInput";
        case ErrorKind::SingleClassResample: return "SingleClassResample";
        case ErrorKind::EmptyMatrix: return "EmptyMatrix";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::InconsistentDimensions: return "InconsistentDimensions";
        case ErrorKind::NoValidCells: return "NoValidCells";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::InvalidSpec: return "InvalidSpec";
        case ErrorKind::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

}  // namespace slimtsf
