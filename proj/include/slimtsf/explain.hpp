#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "slimtsf/features.hpp"
#include "slimtsf/forest.hpp"

namespace slimtsf {

/// One bootstrap iteration's normalized MDI vector plus its selection flags
/// (selected <=> importance > 0 in this iteration).
struct BootstrapRecord {
    std::size_t iteration = 0;
    ImportanceVector importance;
    std::vector<bool> selected;
};

/// Runs B bootstrap iterations: each draws a size-n resample with replacement
/// from a seed derived from (master_seed, iteration), fits a forest on it, and
/// records the normalized MDI importances. A single-class resample is retried
/// with the next derived seed, at most 10 times, before the iteration fails
/// with SingleClassResample. Iterations are order-independent.
std::vector<BootstrapRecord> bootstrap_importances(const DataMatrix& x,
                                                   std::span<const int> labels,
                                                   const ForestHyperparams& hp, std::size_t b_count,
                                                   std::uint64_t master_seed, int threads = 1);

struct CumulativeImportance {
    std::vector<double> cumulative;     // per-feature importance sums
    std::vector<std::size_t> frequency;  // per-feature selection counts
    std::size_t iterations = 0;
};

/// Sums importances and selection counts across records (fixed iteration
/// order, so results are bit-exact and permutation-invariant).
CumulativeImportance accumulate(std::span<const BootstrapRecord> records);

struct RankedFeature {
    std::size_t feature = 0;
    double cumulative = 0.0;
    double share = 0.0;  // cumulative / total cumulative mass
    std::size_t frequency = 0;
};

/// Features in descending cumulative share; ties broken by higher selection
/// frequency, then by descriptor (index) order.
std::vector<RankedFeature> rank_features(const CumulativeImportance& cum);

struct ChannelProfilePoint {
    double position_mins_before_end = 0.0;
    double share = 0.0;
};

/// Importance share aggregated onto (channel, temporal position): each feature
/// attributes its share to its channel at its interval midpoint (group-union
/// midpoint for pooled features), expressed in minutes before the observation
/// window end.
struct ChannelImportanceProfile {
    std::vector<std::string> channels;
    std::vector<std::vector<ChannelProfilePoint>> points;  // per channel, ascending position

    double channel_share(std::size_t channel) const;
};

ChannelImportanceProfile channel_profile(const CumulativeImportance& cum,
                                         const FeatureSchema& schema, std::int64_t cadence_s);

/// CSV export of the cumulative ledger, ranked: feature_name, cumulative,
/// share, frequency, channel, scale, position_mins_before_end, statistic,
/// pooling.
void write_importance_ledger_csv(std::ostream& out, const CumulativeImportance& cum,
                                 const FeatureSchema& schema, std::int64_t cadence_s);

/// CSV export of the channel profile: channel, position_mins_before_end, share.
void write_channel_profile_csv(std::ostream& out, const ChannelImportanceProfile& profile);

}  // namespace slimtsf
