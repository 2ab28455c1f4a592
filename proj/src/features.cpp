#include "slimtsf/features.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <ostream>

namespace slimtsf {

namespace {

void check_interval(std::size_t n, std::size_t start, std::size_t end) {
    if (start > end || end >= n) {
        throw Error(ErrorKind::IndexOutOfRange,
                    "interval [" + std::to_string(start) + ", " + std::to_string(end) +
                        "] out of range for length " + std::to_string(n));
    }
}

void validate_config(const std::vector<ScaleSpec>& scales, const ExtractionConfig& config) {
    for (const ScaleSpec& s : scales) {
        if (s.width < 3) {
            throw Error(ErrorKind::InvalidConfig, "window scale width must be >= 3 samples");
        }
        if (s.stride < 1) {
            throw Error(ErrorKind::InvalidConfig, "window scale stride must be >= 1");
        }
    }
    if (config.include_pooled && config.pool_size < 2) {
        throw Error(ErrorKind::InvalidConfig, "pool_size must be >= 2");
    }
}

void append_double(std::string& out, double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

}  // namespace

const char* to_string(Statistic stat) {
    switch (stat) {
        case Statistic::Mean: return "mean";
        case Statistic::Std: return "std";
        case Statistic::Slope: return "slope";
    }
    return "?";
}

const char* to_string(Pooling pool) {
    switch (pool) {
        case Pooling::None: return "none";
        case Pooling::Max: return "max";
        case Pooling::Min: return "min";
        case Pooling::Mean: return "mean";
    }
    return "?";
}

std::vector<ScaleSpec> ExtractionConfig::auto_scales(std::size_t n) {
    std::vector<ScaleSpec> scales;
    for (const std::size_t divisor : {std::size_t{8}, std::size_t{4}, std::size_t{2}}) {
        const std::size_t width = std::max<std::size_t>(3, (n + divisor - 1) / divisor);
        if (std::any_of(scales.begin(), scales.end(),
                        [&](const ScaleSpec& s) { return s.width == width; })) {
            continue;  // tiny n can collapse neighboring scales
        }
        scales.push_back({width, std::max<std::size_t>(1, width / 2)});
    }
    return scales;
}

std::vector<ScaleSpec> ExtractionConfig::resolve_scales(std::size_t n) const {
    return scales.empty() ? auto_scales(n) : scales;
}

double interval_mean(std::span<const double> values, std::size_t start, std::size_t end) {
    check_interval(values.size(), start, end);
    double acc = 0.0;
    for (std::size_t i = start; i <= end; ++i) acc += values[i];
    return acc / static_cast<double>(end - start + 1);
}

double interval_std(std::span<const double> values, std::size_t start, std::size_t end) {
    check_interval(values.size(), start, end);
    const std::size_t len = end - start + 1;
    if (len < 2) {
        throw Error(ErrorKind::DegenerateInterval, "std needs at least 2 samples");
    }
    bool constant = true;
    for (std::size_t i = start + 1; i <= end && constant; ++i) {
        constant = values[i] == values[start];
    }
    if (constant) return 0.0;  // exactly zero, independent of accumulation order
    const double mean = interval_mean(values, start, end);
    double ss = 0.0;
    for (std::size_t i = start; i <= end; ++i) {
        const double d = values[i] - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(len - 1));
}

double interval_slope(std::span<const double> values, std::size_t start, std::size_t end) {
    check_interval(values.size(), start, end);
    const std::size_t len = end - start + 1;
    if (len < 2) {
        throw Error(ErrorKind::DegenerateInterval, "slope needs at least 2 samples");
    }
    const double w = static_cast<double>(len);
    const double x_bar = (w - 1.0) / 2.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        sxy += (static_cast<double>(i) - x_bar) * values[start + i];
    }
    const double sxx = w * (w * w - 1.0) / 12.0;
    return sxy / sxx;
}

std::vector<Interval> generate_intervals(std::size_t n, const ExtractionConfig& config) {
    const auto scales = config.resolve_scales(n);
    validate_config(scales, config);

    std::vector<Interval> intervals;
    for (std::size_t sc = 0; sc < scales.size(); ++sc) {
        const auto [width, stride] = scales[sc];
        int ordinal = 0;
        for (std::size_t s = 0; s + width <= n; s += stride) {
            intervals.push_back(
                {static_cast<int>(sc), ordinal++, s, s + width - 1});
        }
    }
    if (intervals.empty()) {
        throw Error(ErrorKind::NoValidIntervals,
                    "series of length " + std::to_string(n) + " is shorter than every scale");
    }
    return intervals;
}

std::vector<PooledGroup> pool_consecutive(std::span<const double> stream, std::size_t pool_size) {
    std::vector<PooledGroup> groups;
    std::size_t g = 0;
    while (g < stream.size()) {
        const std::size_t last = std::min(g + pool_size, stream.size());
        if (last - g < 2) break;  // lone remainder dropped
        PooledGroup group;
        group.first = g;
        group.last = last - 1;
        group.max = stream[g];
        group.min = stream[g];
        double acc = 0.0;
        for (std::size_t i = g; i < last; ++i) {
            group.max = std::max(group.max, stream[i]);
            group.min = std::min(group.min, stream[i]);
            acc += stream[i];
        }
        group.mean = acc / static_cast<double>(last - g);
        groups.push_back(group);
        g = last;
    }
    return groups;
}

std::string FeatureSchema::feature_name(std::size_t j) const {
    const FeatureDescriptor& d = descriptors.at(j);
    std::string name = channels.at(static_cast<std::size_t>(d.channel));
    name += ".s" + std::to_string(d.scale);
    if (d.pool == Pooling::None) {
        name += ".i" + std::to_string(d.interval_index);
    } else {
        name += ".g" + std::to_string(d.pool_group);
    }
    name += ".";
    name += to_string(d.stat);
    if (d.pool != Pooling::None) {
        name += ".";
        name += to_string(d.pool);
    }
    return name;
}

double FeatureSchema::position_samples_before_end(std::size_t j) const {
    const FeatureDescriptor& d = descriptors.at(j);
    const double midpoint = (static_cast<double>(d.span_start) + static_cast<double>(d.span_end)) / 2.0;
    // Sample i sits (n - i) * cadence before the half-open window end.
    return static_cast<double>(window_len) - midpoint;
}

FeatureSchema build_schema(const std::vector<std::string>& channels, std::size_t n,
                           const ExtractionConfig& config) {
    FeatureSchema schema;
    schema.channels = channels;
    schema.window_len = n;
    if (channels.empty()) return schema;

    const std::vector<Interval> intervals = generate_intervals(n, config);
    const int n_scales = intervals.back().scale + 1;

    // indices of each scale's intervals in scan order
    std::vector<std::vector<std::size_t>> by_scale(static_cast<std::size_t>(n_scales));
    for (std::size_t k = 0; k < intervals.size(); ++k) {
        by_scale[static_cast<std::size_t>(intervals[k].scale)].push_back(k);
    }

    constexpr Statistic kStats[] = {Statistic::Mean, Statistic::Std, Statistic::Slope};
    for (int ch = 0; ch < static_cast<int>(channels.size()); ++ch) {
        for (const Interval& iv : intervals) {
            for (const Statistic stat : kStats) {
                FeatureDescriptor d;
                d.channel = ch;
                d.scale = iv.scale;
                d.interval_index = iv.index;
                d.stat = stat;
                d.span_start = iv.start;
                d.span_end = iv.end;
                schema.descriptors.push_back(d);
            }
        }
    }
    if (config.include_pooled) {
        for (int ch = 0; ch < static_cast<int>(channels.size()); ++ch) {
            for (int sc = 0; sc < n_scales; ++sc) {
                const auto& scale_intervals = by_scale[static_cast<std::size_t>(sc)];
                // group boundaries depend only on the interval count
                std::vector<double> dummy(scale_intervals.size(), 0.0);
                const auto groups = pool_consecutive(dummy, config.pool_size);
                for (const Statistic stat : kStats) {
                    for (std::size_t g = 0; g < groups.size(); ++g) {
                        const Interval& first = intervals[scale_intervals[groups[g].first]];
                        const Interval& last = intervals[scale_intervals[groups[g].last]];
                        for (const Pooling pool : {Pooling::Max, Pooling::Min, Pooling::Mean}) {
                            FeatureDescriptor d;
                            d.channel = ch;
                            d.scale = sc;
                            d.pool_group = static_cast<int>(g);
                            d.stat = stat;
                            d.pool = pool;
                            d.span_start = first.start;
                            d.span_end = last.end;
                            schema.descriptors.push_back(d);
                        }
                    }
                }
            }
        }
    }
    return schema;
}

FeatureVector extract(const LabeledInstance& instance, const ExtractionConfig& config) {
    const TimeSeriesSlice& window = instance.window;
    std::vector<std::string> channel_names;
    channel_names.reserve(window.channels.size());
    for (const ChannelId id : window.channels) channel_names.emplace_back(to_string(id));

    auto schema = std::make_shared<FeatureSchema>(
        build_schema(channel_names, window.length(), config));

    FeatureVector out;
    out.schema = schema;
    if (channel_names.empty()) return out;
    out.values.reserve(schema->size());

    const std::vector<Interval> intervals = generate_intervals(window.length(), config);
    const int n_scales = intervals.back().scale + 1;

    // Base statistics, kept per (channel, scale, statistic) for the pooling pass.
    // streams[ch][scale][stat] follows scan order.
    std::vector<std::vector<std::array<std::vector<double>, 3>>> streams(
        channel_names.size(),
        std::vector<std::array<std::vector<double>, 3>>(static_cast<std::size_t>(n_scales)));

    for (std::size_t ch = 0; ch < channel_names.size(); ++ch) {
        const std::span<const double> series(window.values[ch]);
        for (const Interval& iv : intervals) {
            const double stats[3] = {interval_mean(series, iv.start, iv.end),
                                     interval_std(series, iv.start, iv.end),
                                     interval_slope(series, iv.start, iv.end)};
            for (int s = 0; s < 3; ++s) {
                out.values.push_back(stats[s]);
                streams[ch][static_cast<std::size_t>(iv.scale)][static_cast<std::size_t>(s)]
                    .push_back(stats[s]);
            }
        }
    }

    if (config.include_pooled) {
        for (std::size_t ch = 0; ch < channel_names.size(); ++ch) {
            for (int sc = 0; sc < n_scales; ++sc) {
                for (std::size_t s = 0; s < 3; ++s) {
                    const auto& stream = streams[ch][static_cast<std::size_t>(sc)][s];
                    for (const PooledGroup& g : pool_consecutive(stream, config.pool_size)) {
                        out.values.push_back(g.max);
                        out.values.push_back(g.min);
                        out.values.push_back(g.mean);
                    }
                }
            }
        }
    }

    if (out.values.size() != schema->size()) {
        throw Error(ErrorKind::InconsistentDimensions,
                    "extracted value count does not match the schema");
    }
    for (const double v : out.values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorKind::InconsistentDimensions, "non-finite feature value");
        }
    }
    return out;
}

FeatureDataset extract_dataset(std::span<const LabeledInstance> instances,
                               const ExtractionConfig& config) {
    if (instances.empty()) {
        throw Error(ErrorKind::EmptyInput, "no instances to extract");
    }
    FeatureDataset dataset;
    dataset.cadence_s = instances.front().window.cadence_s;

    const FeatureVector first = extract(instances.front(), config);
    dataset.schema = first.schema;
    dataset.x = DataMatrix(instances.size(), first.values.size());
    dataset.labels.reserve(instances.size());
    dataset.event_ids.reserve(instances.size());

    for (std::size_t r = 0; r < instances.size(); ++r) {
        const FeatureVector fv = r == 0 ? first : extract(instances[r], config);
        if (*fv.schema != *dataset.schema) {
            throw Error(ErrorKind::InconsistentDimensions,
                        "instance '" + instances[r].event_id +
                            "' produced a different feature schema");
        }
        for (std::size_t c = 0; c < fv.values.size(); ++c) dataset.x(r, c) = fv.values[c];
        dataset.labels.push_back(instances[r].label);
        dataset.event_ids.push_back(instances[r].event_id);
    }
    return dataset;
}

void write_feature_csv(const FeatureDataset& dataset, std::ostream& out) {
    std::string line;
    for (std::size_t j = 0; j < dataset.schema->size(); ++j) {
        if (!line.empty()) line += ',';
        line += dataset.schema->feature_name(j);
    }
    line += line.empty() ? "label" : ",label";
    out << line << '\n';
    for (std::size_t r = 0; r < dataset.x.rows(); ++r) {
        line.clear();
        for (std::size_t c = 0; c < dataset.x.cols(); ++c) {
            append_double(line, dataset.x(r, c));
            line += ',';
        }
        line += std::to_string(dataset.labels[r]);
        out << line << '\n';
    }
    if (!out) throw Error(ErrorKind::IoFailure, "failed writing feature CSV");
}

}  // namespace slimtsf
