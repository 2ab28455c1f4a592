#include "slimtsf/explain.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <ostream>

#include "slimtsf/parallel.hpp"
#include "slimtsf/rng.hpp"

namespace slimtsf {

namespace {

constexpr std::size_t kMaxResampleRetries = 10;

bool has_both_classes(std::span<const int> labels, std::span<const std::size_t> rows) {
    const int first = labels[rows.front()];
    return std::any_of(rows.begin(), rows.end(),
                       [&](std::size_t r) { return labels[r] != first; });
}

void append_double(std::string& out, double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

}  // namespace

std::vector<BootstrapRecord> bootstrap_importances(const DataMatrix& x,
                                                   std::span<const int> labels,
                                                   const ForestHyperparams& hp, std::size_t b_count,
                                                   std::uint64_t master_seed, int threads) {
    if (b_count == 0) {
        throw Error(ErrorKind::InvalidConfig, "bootstrap iteration count must be >= 1");
    }
    if (x.rows() != labels.size()) {
        throw Error(ErrorKind::DimensionMismatch, "label count does not match matrix rows");
    }

    const std::size_t n = x.rows();
    std::vector<BootstrapRecord> records(b_count);

    parallel_for(b_count, threads, [&](std::size_t b) {
        std::vector<std::size_t> rows(n);
        std::uint64_t iteration_seed = 0;
        bool ok = false;
        for (std::size_t retry = 0; retry <= kMaxResampleRetries; ++retry) {
            iteration_seed = derive_seed(master_seed, seed_stream::kBootstrapIteration,
                                         static_cast<std::uint64_t>(b),
                                         static_cast<std::uint64_t>(retry));
            Rng rng(iteration_seed);
            for (std::size_t i = 0; i < n; ++i) rows[i] = rng.index(n);
            if (has_both_classes(labels, rows)) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw Error(ErrorKind::SingleClassResample,
                        "bootstrap iteration " + std::to_string(b) + " drew a single class " +
                            std::to_string(kMaxResampleRetries + 1) + " times");
        }

        const DataMatrix xb = x.select_rows(rows);
        std::vector<int> yb(n);
        for (std::size_t i = 0; i < n; ++i) yb[i] = labels[rows[i]];

        ForestHyperparams iteration_hp = hp;
        iteration_hp.seed = derive_seed(iteration_seed, seed_stream::kBootstrapForest);
        const Forest forest = fit_forest(xb, yb, iteration_hp, 1);

        BootstrapRecord record;
        record.iteration = b;
        record.importance = mdi_importance(forest);
        record.selected.resize(record.importance.values.size());
        for (std::size_t j = 0; j < record.selected.size(); ++j) {
            record.selected[j] = record.importance.values[j] > 0.0;
        }
        records[b] = std::move(record);
    });
    return records;
}

CumulativeImportance accumulate(std::span<const BootstrapRecord> records) {
    if (records.empty()) {
        throw Error(ErrorKind::EmptyInput, "no bootstrap records to accumulate");
    }
    const std::size_t d = records.front().importance.values.size();
    CumulativeImportance cum;
    cum.cumulative.assign(d, 0.0);
    cum.frequency.assign(d, 0);
    cum.iterations = records.size();
    for (const BootstrapRecord& record : records) {
        if (record.importance.values.size() != d || record.selected.size() != d) {
            throw Error(ErrorKind::InconsistentDimensions,
                        "bootstrap records disagree on feature count");
        }
        for (std::size_t j = 0; j < d; ++j) {
            cum.cumulative[j] += record.importance.values[j];
            cum.frequency[j] += record.selected[j] ? 1 : 0;
        }
    }
    return cum;
}

std::vector<RankedFeature> rank_features(const CumulativeImportance& cum) {
    const std::size_t d = cum.cumulative.size();
    double total = 0.0;
    for (const double v : cum.cumulative) total += v;

    std::vector<RankedFeature> ranked(d);
    for (std::size_t j = 0; j < d; ++j) {
        ranked[j].feature = j;
        ranked[j].cumulative = cum.cumulative[j];
        ranked[j].share = total > 0.0 ? cum.cumulative[j] / total : 0.0;
        ranked[j].frequency = cum.frequency[j];
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const RankedFeature& a, const RankedFeature& b) {
        if (a.cumulative != b.cumulative) return a.cumulative > b.cumulative;
        if (a.frequency != b.frequency) return a.frequency > b.frequency;
        return a.feature < b.feature;
    });
    return ranked;
}

double ChannelImportanceProfile::channel_share(std::size_t channel) const {
    double total = 0.0;
    for (const ChannelProfilePoint& p : points.at(channel)) total += p.share;
    return total;
}

ChannelImportanceProfile channel_profile(const CumulativeImportance& cum,
                                         const FeatureSchema& schema, std::int64_t cadence_s) {
    if (cum.cumulative.size() != schema.size()) {
        throw Error(ErrorKind::InconsistentDimensions,
                    "cumulative importance size does not match the schema");
    }
    double total = 0.0;
    for (const double v : cum.cumulative) total += v;

    const double mins_per_sample = static_cast<double>(cadence_s) / 60.0;
    std::vector<std::map<double, double>> grouped(schema.channels.size());
    for (std::size_t j = 0; j < schema.size(); ++j) {
        const double share = total > 0.0 ? cum.cumulative[j] / total : 0.0;
        const double position = schema.position_samples_before_end(j) * mins_per_sample;
        grouped[static_cast<std::size_t>(schema.descriptors[j].channel)][position] += share;
    }

    ChannelImportanceProfile profile;
    profile.channels = schema.channels;
    profile.points.resize(grouped.size());
    for (std::size_t ch = 0; ch < grouped.size(); ++ch) {
        profile.points[ch].reserve(grouped[ch].size());
        for (const auto& [position, share] : grouped[ch]) {
            profile.points[ch].push_back({position, share});
        }
    }
    return profile;
}

void write_importance_ledger_csv(std::ostream& out, const CumulativeImportance& cum,
                                 const FeatureSchema& schema, std::int64_t cadence_s) {
    if (cum.cumulative.size() != schema.size()) {
        throw Error(ErrorKind::InconsistentDimensions,
                    "cumulative importance size does not match the schema");
    }
    out << "feature_name,cumulative,share,frequency,channel,scale,position_mins_before_end,"
           "statistic,pooling\n";
    const double mins_per_sample = static_cast<double>(cadence_s) / 60.0;
    std::string line;
    for (const RankedFeature& f : rank_features(cum)) {
        const FeatureDescriptor& d = schema.descriptors[f.feature];
        line.clear();
        line += schema.feature_name(f.feature);
        line += ',';
        append_double(line, f.cumulative);
        line += ',';
        append_double(line, f.share);
        line += ',';
        line += std::to_string(f.frequency);
        line += ',';
        line += schema.channels[static_cast<std::size_t>(d.channel)];
        line += ',';
        line += std::to_string(d.scale);
        line += ',';
        append_double(line, schema.position_samples_before_end(f.feature) * mins_per_sample);
        line += ',';
        line += to_string(d.stat);
        line += ',';
        line += to_string(d.pool);
        out << line << '\n';
    }
    if (!out) throw Error(ErrorKind::IoFailure, "failed writing importance ledger CSV");
}

void write_channel_profile_csv(std::ostream& out, const ChannelImportanceProfile& profile) {
    out << "channel,position_mins_before_end,share\n";
    std::string line;
    for (std::size_t ch = 0; ch < profile.channels.size(); ++ch) {
        for (const ChannelProfilePoint& p : profile.points[ch]) {
            line.clear();
            line += profile.channels[ch];
            line += ',';
            append_double(line, p.position_mins_before_end);
            line += ',';
            append_double(line, p.share);
            out << line << '\n';
        }
    }
    if (!out) throw Error(ErrorKind::IoFailure, "failed writing channel profile CSV");
}

}  // namespace slimtsf
