#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "slimtsf/dataset.hpp"

namespace slimtsf {

/// Desk-scale synthetic analog of the flux dataset. Background flux is
/// lognormal noise around background_pfu (gaussian in log10 with
/// noise_decades sigma). Event categories receive an additive precursor in
/// log10 space that rises exponentially toward the onset:
///
///     signal(t) = amplitude * exp(-lag_decay_per_min * minutes(t_sep - t))
///
/// so a window cut at lag L sees the same in-window shape with its amplitude
/// scaled by exactly exp(-decay * L). Strong events carry the full per-channel
/// amplitude, Weak events the fraction weak_amplitude_scale of it, NoEvent
/// records background only.
struct SyntheticSpec {
    std::size_t n_strong = 20;
    std::size_t n_weak = 20;
    std::size_t n_noevent = 20;
    std::vector<ChannelId> channels = {ChannelId::P3, ChannelId::P5, ChannelId::P7};
    double background_pfu = 0.1;
    double noise_decades = 0.35;
    std::vector<double> amplitudes = {2.5, 0.0, 0.0};  // log10 decades at onset, per channel
    double weak_amplitude_scale = 0.3;
    double lag_decay_per_min = 0.01;
    std::int64_t cadence_s = 60;
    double slice_hours = 14.0;
    std::uint64_t seed = 0;

    void validate() const;  // InvalidSpec
    bool operator==(const SyntheticSpec&) const = default;
};

void to_json(nlohmann::json& j, const SyntheticSpec& spec);
void from_json(const nlohmann::json& j, SyntheticSpec& spec);

/// Deterministic in-memory generation; the file-based path (gen-synthetic)
/// writes exactly these records.
std::vector<EventRecord> generate_events(const SyntheticSpec& spec);

/// Writes manifest.json plus slices/<event_id>.csv under out_dir.
/// Returns the manifest path.
std::filesystem::path write_synthetic_dataset(const SyntheticSpec& spec,
                                              const std::filesystem::path& out_dir);

}  // namespace slimtsf
