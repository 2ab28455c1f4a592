#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "slimtsf/error.hpp"

namespace slimtsf {

/// GOES integral proton channels (P3/P5/P7 = protons >= 10/50/100 MeV) plus
/// the XRS long-wavelength X-ray channel.
enum class ChannelId { P3, P5, P7, XL };

const char* to_string(ChannelId id);
ChannelId channel_from_string(std::string_view name);  // UnknownCategory on bad name

enum class EventCategory { Strong, Weak, NoEvent };

const char* to_string(EventCategory category);
EventCategory category_from_string(std::string_view name);  // UnknownCategory

/// Gaps longer than this many consecutive samples make a slice invalid for
/// window cutting; shorter gaps are linearly interpolated and masked.
inline constexpr std::size_t kMaxInterpolatedGap = 15;

/// Fixed-cadence multivariate flux window. Sample i sits at
/// start_time + i * cadence_s; the covered span is half-open,
/// [start_time, start_time + length * cadence_s).
struct TimeSeriesSlice {
    std::int64_t start_time = 0;  // Unix epoch seconds, UTC
    std::int64_t cadence_s = 60;
    std::vector<ChannelId> channels;
    std::vector<std::vector<double>> values;  // [channel][sample]
    std::vector<bool> gap_mask;               // true = reconstructed sample

    std::size_t length() const { return gap_mask.size(); }
    std::int64_t end_time() const {
        return start_time + static_cast<std::int64_t>(length()) * cadence_s;
    }
    /// Longest run of masked (reconstructed) samples.
    std::size_t max_gap_run() const;

    bool operator==(const TimeSeriesSlice&) const = default;
};

struct EventRecord {
    std::string event_id;
    std::int64_t sep_onset = 0;  // t_sep, epoch seconds
    EventCategory category = EventCategory::NoEvent;
    TimeSeriesSlice slice;
};

/// Observation/lag window geometry. The observation window is half-open
/// [t_sep - lag - obs, t_sep - lag); the lag window separates its end from the
/// event onset.
struct WindowSpec {
    std::int64_t obs_s = 0;
    std::int64_t lag_s = 0;

    static WindowSpec hours_mins(double obs_hours, double lag_mins);
    double obs_hours() const { return static_cast<double>(obs_s) / 3600.0; }
    double lag_mins() const { return static_cast<double>(lag_s) / 60.0; }
};

enum class Scenario { StrongVsWeak, StrongVsRest, EventVsNoEvent };

const char* to_string(Scenario scenario);
Scenario scenario_from_string(std::string_view name);  // InvalidConfig

enum class ClassRole { Positive, Negative, Excluded };

/// Total category -> role map induced by a scenario.
ClassRole scenario_role(Scenario scenario, EventCategory category);

struct LabeledInstance {
    std::string event_id;
    TimeSeriesSlice window;
    int label = 0;  // 1 = positive class
};

/// Parses a slice CSV (header `timestamp,p3,p5,p7[,xl]`; empty cell = missing
/// sample). The cadence is inferred from the timestamp grid; rows absent from
/// the grid count as missing samples. A sample with any missing cell is
/// reconstructed for every channel (linear interior interpolation, nearest
/// extension at the edges) and flagged in gap_mask.
TimeSeriesSlice parse_slice_csv(std::istream& in, const std::string& origin);
TimeSeriesSlice parse_slice_csv_file(const std::filesystem::path& path);

/// Writes the canonical CSV form: every grid row present, masked samples as
/// empty cells. Values round-trip exactly through parse_slice_csv.
void write_slice_csv(const TimeSeriesSlice& slice, std::ostream& out);

/// Reads an event manifest (JSON array of {event_id, sep_onset, category,
/// slice_path}) and loads each referenced slice. slice_path is resolved
/// relative to the manifest's directory.
std::vector<EventRecord> parse_manifest(const std::filesystem::path& manifest_path);

/// Cuts the observation window [t_sep - lag - obs, t_sep - lag) out of the
/// record's slice. The source must cover the span (InsufficientCoverage) and
/// must not contain a masked gap run longer than kMaxInterpolatedGap
/// (ExcessiveGap).
TimeSeriesSlice cut_window(const EventRecord& record, const WindowSpec& spec);

struct ScenarioResult {
    std::vector<LabeledInstance> instances;
    std::size_t excluded = 0;      // records the scenario maps to neither class
    std::size_t cut_failures = 0;  // records dropped because cut_window failed
};

/// Labels and windows every record under the scenario. Records whose window
/// cannot be cut are dropped and tallied; an empty outcome raises EmptyResult.
ScenarioResult apply_scenario(std::span<const EventRecord> records, Scenario scenario,
                              const WindowSpec& spec);

/// Replaces every value v with log10(max(v, floor_pfu)). Mask and shape are
/// preserved.
TimeSeriesSlice log_transform(const TimeSeriesSlice& slice, double floor_pfu);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded stratified split: each class is shuffled independently and divided
/// by train_fraction (rounded, clamped so both sides keep at least one member
/// of any class with two or more instances).
SplitIndices stratified_split(std::span<const int> labels, double train_fraction,
                              std::uint64_t seed);

}  // namespace slimtsf
