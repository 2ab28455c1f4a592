#include "slimtsf/time_util.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "slimtsf/error.hpp"

namespace slimtsf {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian civil date (Hinnant).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilDate {
    std::int64_t year;
    unsigned month;
    unsigned day;
};

CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {y + (m <= 2), m, d};
}

unsigned days_in_month(std::int64_t year, unsigned month) {
    static constexpr std::array<unsigned, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                         31, 31, 30, 31, 30, 31};
    if (month == 2) {
        const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return lengths[month - 1];
}

[[noreturn]] void bad_timestamp(std::string_view text) {
    throw Error(ErrorKind::SchemaViolation,
                "malformed ISO-8601 UTC timestamp '" + std::string(text) + "'");
}

bool parse_uint(std::string_view text, std::size_t pos, std::size_t len, unsigned& out) {
    if (pos + len > text.size()) return false;
    unsigned value = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        const char c = text[i];
        if (c < '0' || c > '9') return false;
        value = value * 10 + static_cast<unsigned>(c - '0');
    }
    out = value;
    return true;
}

}  // namespace

std::int64_t parse_iso8601_utc(std::string_view text) {
    // YYYY-MM-DD{T| }HH:MM[:SS][Z]
    unsigned year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
    if (!parse_uint(text, 0, 4, year) || text.size() < 16) bad_timestamp(text);
    if (text[4] != '-' || !parse_uint(text, 5, 2, month)) bad_timestamp(text);
    if (text[7] != '-' || !parse_uint(text, 8, 2, day)) bad_timestamp(text);
    if (text[10] != 'T' && text[10] != ' ') bad_timestamp(text);
    if (!parse_uint(text, 11, 2, hour)) bad_timestamp(text);
    if (text[13] != ':' || !parse_uint(text, 14, 2, minute)) bad_timestamp(text);

    std::size_t pos = 16;
    if (pos < text.size() && text[pos] == ':') {
        if (!parse_uint(text, pos + 1, 2, second)) bad_timestamp(text);
        pos += 3;
    }
    if (pos < text.size()) {
        const std::string_view rest = text.substr(pos);
        if (rest != "Z" && rest != "+00:00") bad_timestamp(text);
    }

    if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month) || hour > 23 ||
        minute > 59 || second > 59) {
        bad_timestamp(text);
    }

    return days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second;
}

std::string format_iso8601_utc(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    const CivilDate date = civil_from_days(days);
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(date.year), date.month, date.day,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return buffer;
}

}  // namespace slimtsf
