#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace slimtsf {

/// Parses an ISO-8601 UTC timestamp ("YYYY-MM-DDTHH:MM[:SS][Z]") into Unix
/// epoch seconds. A space is accepted in place of 'T'. Throws
/// Error(SchemaViolation) on malformed input; offsets other than Z/UTC are
/// rejected.
std::int64_t parse_iso8601_utc(std::string_view text);

/// Formats epoch seconds as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601_utc(std::int64_t epoch_seconds);

}  // namespace slimtsf
