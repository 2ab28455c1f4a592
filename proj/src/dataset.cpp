#include "slimtsf/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "slimtsf/rng.hpp"
#include "slimtsf/time_util.hpp"

namespace slimtsf {

namespace {

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (const char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_flux_cell(const std::string& cell, const std::string& origin) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw Error(ErrorKind::SchemaViolation,
                    origin + ": unparseable flux value '" + cell + "'");
    }
    return value;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

void format_double(std::string& out, double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

}  // namespace

const char* to_string(ChannelId id) {
    switch (id) {
        case ChannelId::P3: return "p3";
        case ChannelId::P5: return "p5";
        case ChannelId::P7: return "p7";
        case ChannelId::XL: return "xl";
    }
    return "?";
}

ChannelId channel_from_string(std::string_view name) {
    const std::string lower = to_lower(name);
    if (lower == "p3") return ChannelId::P3;
    if (lower == "p5") return ChannelId::P5;
    if (lower == "p7") return ChannelId::P7;
    if (lower == "xl" || lower == "xrs") return ChannelId::XL;
    throw Error(ErrorKind::UnknownCategory, "unknown channel '" + std::string(name) + "'");
}

const char* to_string(EventCategory category) {
    switch (category) {
        case EventCategory::Strong: return "Strong";
        case EventCategory::Weak: return "Weak";
        case EventCategory::NoEvent: return "NoEvent";
    }
    return "?";
}

EventCategory category_from_string(std::string_view name) {
    if (name == "Strong") return EventCategory::Strong;
    if (name == "Weak") return EventCategory::Weak;
    if (name == "NoEvent") return EventCategory::NoEvent;
    throw Error(ErrorKind::UnknownCategory, "unknown event category '" + std::string(name) + "'");
}

const char* to_string(Scenario scenario) {
    switch (scenario) {
        case Scenario::StrongVsWeak: return "strong-vs-weak";
        case Scenario::StrongVsRest: return "strong-vs-rest";
        case Scenario::EventVsNoEvent: return "event-vs-noevent";
    }
    return "?";
}

Scenario scenario_from_string(std::string_view name) {
    const std::string lower = to_lower(name);
    if (lower == "strong-vs-weak") return Scenario::StrongVsWeak;
    if (lower == "strong-vs-rest") return Scenario::StrongVsRest;
    if (lower == "event-vs-noevent") return Scenario::EventVsNoEvent;
    throw Error(ErrorKind::InvalidConfig, "unknown scenario '" + std::string(name) + "'");
}

ClassRole scenario_role(Scenario scenario, EventCategory category) {
    switch (scenario) {
        case Scenario::StrongVsWeak:
            if (category == EventCategory::Strong) return ClassRole::Positive;
            if (category == EventCategory::Weak) return ClassRole::Negative;
            return ClassRole::Excluded;
        case Scenario::StrongVsRest:
            return category == EventCategory::Strong ? ClassRole::Positive : ClassRole::Negative;
        case Scenario::EventVsNoEvent:
            return category == EventCategory::NoEvent ? ClassRole::Negative : ClassRole::Positive;
    }
    return ClassRole::Excluded;
}

std::size_t TimeSeriesSlice::max_gap_run() const {
    std::size_t longest = 0, run = 0;
    for (const bool masked : gap_mask) {
        run = masked ? run + 1 : 0;
        longest = std::max(longest, run);
    }
    return longest;
}

WindowSpec WindowSpec::hours_mins(double obs_hours, double lag_mins) {
    WindowSpec spec;
    spec.obs_s = static_cast<std::int64_t>(std::llround(obs_hours * 3600.0));
    spec.lag_s = static_cast<std::int64_t>(std::llround(lag_mins * 60.0));
    return spec;
}

TimeSeriesSlice parse_slice_csv(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorKind::SchemaViolation, origin + ": empty slice file");
    }
    const auto header = split_csv_line(line);
    if (header.empty() || to_lower(trim(header[0])) != "timestamp" || header.size() < 2) {
        throw Error(ErrorKind::SchemaViolation,
                    origin + ": slice header must start with 'timestamp' and name channels");
    }

    TimeSeriesSlice slice;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const ChannelId id = channel_from_string(trim(header[c]));
        if (std::find(slice.channels.begin(), slice.channels.end(), id) != slice.channels.end()) {
            throw Error(ErrorKind::SchemaViolation,
                        origin + ": duplicate channel '" + trim(header[c]) + "'");
        }
        slice.channels.push_back(id);
    }
    const std::size_t n_channels = slice.channels.size();

    struct RawRow {
        std::int64_t timestamp;
        std::vector<std::optional<double>> cells;
    };
    std::vector<RawRow> raw;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != n_channels + 1) {
            throw Error(ErrorKind::SchemaViolation,
                        origin + ": row has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(n_channels + 1));
        }
        RawRow row;
        row.timestamp = parse_iso8601_utc(trim(cells[0]));
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const std::string cell = trim(cells[c]);
            if (cell.empty()) row.cells.emplace_back(std::nullopt);
            else row.cells.emplace_back(parse_flux_cell(cell, origin));
        }
        raw.push_back(std::move(row));
    }

    if (raw.size() < 2) {
        throw Error(ErrorKind::SchemaViolation, origin + ": slice needs at least 2 samples");
    }
    for (std::size_t i = 1; i < raw.size(); ++i) {
        if (raw[i].timestamp <= raw[i - 1].timestamp) {
            throw Error(ErrorKind::NonMonotonicTimestamps,
                        origin + ": timestamps must be strictly increasing (row " +
                            std::to_string(i + 1) + ")");
        }
    }

    // Cadence = GCD of consecutive deltas; rows absent from the implied grid
    // become fully missing samples.
    std::int64_t cadence = 0;
    for (std::size_t i = 1; i < raw.size(); ++i) {
        cadence = std::gcd(cadence, raw[i].timestamp - raw[i - 1].timestamp);
    }
    slice.start_time = raw.front().timestamp;
    slice.cadence_s = cadence;

    const std::size_t n =
        static_cast<std::size_t>((raw.back().timestamp - raw.front().timestamp) / cadence) + 1;
    slice.gap_mask.assign(n, true);
    std::vector<std::vector<std::optional<double>>> grid(
        n_channels, std::vector<std::optional<double>>(n, std::nullopt));
    for (const auto& row : raw) {
        const auto i = static_cast<std::size_t>((row.timestamp - slice.start_time) / cadence);
        const bool complete =
            std::all_of(row.cells.begin(), row.cells.end(), [](const auto& c) { return c.has_value(); });
        slice.gap_mask[i] = !complete;
        if (complete) {
            for (std::size_t c = 0; c < n_channels; ++c) grid[c][i] = row.cells[c];
        }
    }

    // A sample with any missing cell is reconstructed for every channel so the
    // per-sample mask stays the single source of truth.
    std::vector<std::size_t> anchors;
    for (std::size_t i = 0; i < n; ++i) {
        if (!slice.gap_mask[i]) anchors.push_back(i);
    }
    if (anchors.empty()) {
        throw Error(ErrorKind::SchemaViolation, origin + ": slice has no complete samples");
    }

    slice.values.assign(n_channels, std::vector<double>(n, 0.0));
    for (std::size_t c = 0; c < n_channels; ++c) {
        auto& col = slice.values[c];
        for (const std::size_t i : anchors) col[i] = *grid[c][i];
        // leading / trailing gaps: nearest-value extension
        for (std::size_t i = 0; i < anchors.front(); ++i) col[i] = col[anchors.front()];
        for (std::size_t i = anchors.back() + 1; i < n; ++i) col[i] = col[anchors.back()];
        // interior gaps: linear interpolation between surrounding anchors
        for (std::size_t a = 0; a + 1 < anchors.size(); ++a) {
            const std::size_t lo = anchors[a], hi = anchors[a + 1];
            for (std::size_t i = lo + 1; i < hi; ++i) {
                const double w = static_cast<double>(i - lo) / static_cast<double>(hi - lo);
                col[i] = col[lo] + (col[hi] - col[lo]) * w;
            }
        }
    }
    return slice;
}

TimeSeriesSlice parse_slice_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::MissingFile, "cannot open slice file '" + path.string() + "'");
    }
    return parse_slice_csv(in, path.filename().string());
}

void write_slice_csv(const TimeSeriesSlice& slice, std::ostream& out) {
    std::string line = "timestamp";
    for (const ChannelId id : slice.channels) {
        line += ',';
        line += to_string(id);
    }
    line += '\n';
    out << line;
    for (std::size_t i = 0; i < slice.length(); ++i) {
        line = format_iso8601_utc(slice.start_time + static_cast<std::int64_t>(i) * slice.cadence_s);
        for (std::size_t c = 0; c < slice.channels.size(); ++c) {
            line += ',';
            if (!slice.gap_mask[i]) format_double(line, slice.values[c][i]);
        }
        line += '\n';
        out << line;
    }
    if (!out) throw Error(ErrorKind::IoFailure, "failed writing slice CSV");
}

std::vector<EventRecord> parse_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) {
        throw Error(ErrorKind::MissingFile,
                    "cannot open manifest '" + manifest_path.string() + "'");
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::SchemaViolation,
                    "manifest is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_array()) {
        throw Error(ErrorKind::SchemaViolation, "manifest must be a JSON array");
    }

    const auto base_dir = manifest_path.parent_path();
    std::vector<EventRecord> records;
    records.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& entry = doc[i];
        const std::string where = "manifest entry " + std::to_string(i);
        if (!entry.is_object()) throw Error(ErrorKind::SchemaViolation, where + " is not an object");
        for (const char* field : {"event_id", "sep_onset", "category", "slice_path"}) {
            if (!entry.contains(field) || !entry[field].is_string()) {
                throw Error(ErrorKind::SchemaViolation,
                            where + " is missing string field '" + field + "'");
            }
        }
        EventRecord record;
        record.event_id = entry["event_id"].get<std::string>();
        record.sep_onset = parse_iso8601_utc(entry["sep_onset"].get<std::string>());
        record.category = category_from_string(entry["category"].get<std::string>());
        record.slice = parse_slice_csv_file(base_dir / entry["slice_path"].get<std::string>());
        if (record.slice.end_time() > record.sep_onset) {
            throw Error(ErrorKind::SchemaViolation,
                        where + ": slice extends past sep_onset for '" + record.event_id + "'");
        }
        records.push_back(std::move(record));
    }
    return records;
}

TimeSeriesSlice cut_window(const EventRecord& record, const WindowSpec& spec) {
    if (spec.obs_s <= 0 || spec.lag_s < 0) {
        throw Error(ErrorKind::InvalidConfig, "window spec requires obs > 0 and lag >= 0");
    }
    const TimeSeriesSlice& src = record.slice;
    const std::int64_t cadence = src.cadence_s;
    if (spec.obs_s % cadence != 0) {
        throw Error(ErrorKind::InvalidConfig,
                    "observation length must be a multiple of the slice cadence");
    }
    if (src.max_gap_run() > kMaxInterpolatedGap) {
        throw Error(ErrorKind::ExcessiveGap,
                    "slice for '" + record.event_id + "' has a gap longer than " +
                        std::to_string(kMaxInterpolatedGap) + " samples");
    }

    const std::int64_t window_end = record.sep_onset - spec.lag_s;
    const std::int64_t window_start = window_end - spec.obs_s;
    const std::int64_t first = ceil_div(window_start - src.start_time, cadence);
    const std::int64_t end_offset = window_end - src.start_time;
    const std::int64_t last =
        (end_offset % cadence == 0) ? end_offset / cadence - 1 : floor_div(end_offset, cadence);
    const std::int64_t expected = spec.obs_s / cadence;

    if (first < 0 || last >= static_cast<std::int64_t>(src.length()) ||
        last - first + 1 != expected) {
        throw Error(ErrorKind::InsufficientCoverage,
                    "slice for '" + record.event_id + "' does not cover [" +
                        format_iso8601_utc(window_start) + ", " + format_iso8601_utc(window_end) +
                        ")");
    }

    TimeSeriesSlice out;
    out.start_time = src.start_time + first * cadence;
    out.cadence_s = cadence;
    out.channels = src.channels;
    const auto f = static_cast<std::size_t>(first);
    const auto count = static_cast<std::size_t>(expected);
    out.gap_mask.assign(src.gap_mask.begin() + static_cast<std::ptrdiff_t>(f),
                        src.gap_mask.begin() + static_cast<std::ptrdiff_t>(f + count));
    out.values.reserve(src.values.size());
    for (const auto& col : src.values) {
        out.values.emplace_back(col.begin() + static_cast<std::ptrdiff_t>(f),
                                col.begin() + static_cast<std::ptrdiff_t>(f + count));
    }
    return out;
}

ScenarioResult apply_scenario(std::span<const EventRecord> records, Scenario scenario,
                              const WindowSpec& spec) {
    if (records.empty()) {
        throw Error(ErrorKind::EmptyResult, "no event records to label");
    }
    ScenarioResult result;
    for (const EventRecord& record : records) {
        const ClassRole role = scenario_role(scenario, record.category);
        if (role == ClassRole::Excluded) {
            ++result.excluded;
            continue;
        }
        try {
            LabeledInstance instance;
            instance.event_id = record.event_id;
            instance.window = cut_window(record, spec);
            instance.label = role == ClassRole::Positive ? 1 : 0;
            result.instances.push_back(std::move(instance));
        } catch (const Error&) {
            ++result.cut_failures;
        }
    }
    if (result.instances.empty()) {
        throw Error(ErrorKind::EmptyResult,
                    std::string("no instance survives scenario ") + to_string(scenario));
    }
    return result;
}

TimeSeriesSlice log_transform(const TimeSeriesSlice& slice, double floor_pfu) {
    if (!(floor_pfu > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "log-transform floor must be positive");
    }
    TimeSeriesSlice out = slice;
    for (auto& col : out.values) {
        for (double& v : col) v = std::log10(std::max(v, floor_pfu));
    }
    return out;
}

SplitIndices stratified_split(std::span<const int> labels, double train_fraction,
                              std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorKind::InvalidConfig, "train_fraction must lie in (0, 1)");
    }
    if (labels.empty()) {
        throw Error(ErrorKind::EmptyInput, "cannot split an empty label set");
    }

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    SplitIndices out;
    for (auto& [label, indices] : by_class) {
        Rng rng(derive_seed(seed, seed_stream::kSplit, static_cast<std::uint64_t>(label)));
        rng.shuffle(indices);
        const std::size_t count = indices.size();
        std::size_t n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(count)));
        if (count >= 2) n_train = std::clamp<std::size_t>(n_train, 1, count - 1);
        else n_train = count;  // singleton class stays in training
        for (std::size_t i = 0; i < count; ++i) {
            (i < n_train ? out.train : out.test).push_back(indices[i]);
        }
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

}  // namespace slimtsf
