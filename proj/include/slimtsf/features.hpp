#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "slimtsf/dataset.hpp"
#include "slimtsf/matrix.hpp"

namespace slimtsf {

enum class Statistic { Mean, Std, Slope };
enum class Pooling { None, Max, Min, Mean };

const char* to_string(Statistic stat);
const char* to_string(Pooling pool);

/// Contiguous subsequence produced by one sliding-window scale. Indices are
/// 0-based inclusive here; the conventional 1-based interval [s, e] maps to
/// start = s-1, end = e-1.
struct Interval {
    int scale = 0;          // ordinal of the generating scale
    int index = 0;          // position in scan order within the scale
    std::size_t start = 0;  // 0-based, inclusive
    std::size_t end = 0;    // 0-based, inclusive

    std::size_t length() const { return end - start + 1; }
    bool operator==(const Interval&) const = default;
};

struct ScaleSpec {
    std::size_t width = 0;
    std::size_t stride = 0;
    bool operator==(const ScaleSpec&) const = default;
};

/// Sliding-window extraction settings. An empty scale list means "derive the
/// scales from the series length": widths ceil(n/8), ceil(n/4), ceil(n/2),
/// each striding half its width (50% overlap).
struct ExtractionConfig {
    std::vector<ScaleSpec> scales;
    std::size_t pool_size = 3;
    bool include_pooled = true;

    static std::vector<ScaleSpec> auto_scales(std::size_t n);
    std::vector<ScaleSpec> resolve_scales(std::size_t n) const;

    bool operator==(const ExtractionConfig&) const = default;
};

// Per-interval statistics over values[start..end] (0-based inclusive).
double interval_mean(std::span<const double> values, std::size_t start, std::size_t end);
/// Sample standard deviation (denominator = interval length - 1).
double interval_std(std::span<const double> values, std::size_t start, std::size_t end);
/// Least-squares slope with the within-interval sample index as abscissa.
double interval_slope(std::span<const double> values, std::size_t start, std::size_t end);

/// All intervals for the resolved scales, scale-major then ascending start.
std::vector<Interval> generate_intervals(std::size_t n, const ExtractionConfig& config);

struct PooledGroup {
    double max = 0.0;
    double min = 0.0;
    double mean = 0.0;
    std::size_t first = 0;  // index of the first member in the stream
    std::size_t last = 0;   // index of the last member
};

/// Tiles a per-interval feature stream into non-overlapping groups of
/// pool_size consecutive values. A final partial group is kept when it has at
/// least two members; a lone remainder is dropped.
std::vector<PooledGroup> pool_consecutive(std::span<const double> stream, std::size_t pool_size);

/// Provenance of one feature column. Exactly one of interval_index /
/// pool_group is set (>= 0): pooling == None <=> pool_group < 0.
struct FeatureDescriptor {
    int channel = 0;  // index into the schema channel list
    int scale = 0;
    int interval_index = -1;
    int pool_group = -1;
    Statistic stat = Statistic::Mean;
    Pooling pool = Pooling::None;
    std::size_t span_start = 0;  // samples covered (group union for pooled)
    std::size_t span_end = 0;

    bool operator==(const FeatureDescriptor&) const = default;
};

/// Descriptor list shared by every instance of one extraction run. The order
/// is a pure function of (channel list, window length, config): base features
/// channel-major / scale / interval / (mean, std, slope), then pooled features
/// channel-major / scale / statistic / group / (max, min, mean).
struct FeatureSchema {
    std::vector<std::string> channels;
    std::size_t window_len = 0;
    std::vector<FeatureDescriptor> descriptors;

    std::size_t size() const { return descriptors.size(); }
    /// Column name: {channel}.s{scale}.{i<interval>|g<group>}.{stat}[.{pool}]
    std::string feature_name(std::size_t j) const;
    /// Interval (or group-union) midpoint, in samples before the window end.
    double position_samples_before_end(std::size_t j) const;

    bool operator==(const FeatureSchema&) const = default;
};

FeatureSchema build_schema(const std::vector<std::string>& channels, std::size_t n,
                           const ExtractionConfig& config);

struct FeatureVector {
    std::shared_ptr<const FeatureSchema> schema;
    std::vector<double> values;
};

/// Features for one instance window. The descriptor order matches
/// build_schema for the window's channel list and length.
FeatureVector extract(const LabeledInstance& instance, const ExtractionConfig& config);

/// A full extracted dataset: one row per instance, columns per schema.
struct FeatureDataset {
    std::shared_ptr<const FeatureSchema> schema;
    DataMatrix x;
    std::vector<int> labels;
    std::vector<std::string> event_ids;
    std::int64_t cadence_s = 60;
};

FeatureDataset extract_dataset(std::span<const LabeledInstance> instances,
                               const ExtractionConfig& config);

/// CSV dump: named feature columns, final column = label, one row per instance.
void write_feature_csv(const FeatureDataset& dataset, std::ostream& out);

}  // namespace slimtsf
