#include "slimtsf/synthetic.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "slimtsf/rng.hpp"
#include "slimtsf/time_util.hpp"

namespace slimtsf {

namespace {

// 2011-01-01T00:00:00Z; events are staggered one day apart from here.
constexpr std::int64_t kOnsetBase = 1293840000;

double category_amplitude_scale(EventCategory category, const SyntheticSpec& spec) {
    switch (category) {
        case EventCategory::Strong: return 1.0;
        case EventCategory::Weak: return spec.weak_amplitude_scale;
        case EventCategory::NoEvent: return 0.0;
    }
    return 0.0;
}

EventRecord generate_event(const SyntheticSpec& spec, EventCategory category, std::size_t ordinal,
                           std::size_t global_index) {
    EventRecord record;
    record.category = category;
    record.event_id = std::string(to_string(category)) + "_" + std::to_string(ordinal);
    record.sep_onset = kOnsetBase + static_cast<std::int64_t>(global_index) * 86400;

    const auto n = static_cast<std::size_t>(
        std::llround(spec.slice_hours * 3600.0 / static_cast<double>(spec.cadence_s)));
    TimeSeriesSlice& slice = record.slice;
    slice.cadence_s = spec.cadence_s;
    slice.start_time = record.sep_onset - static_cast<std::int64_t>(n) * spec.cadence_s;
    slice.channels = spec.channels;
    slice.gap_mask.assign(n, false);
    slice.values.assign(spec.channels.size(), std::vector<double>(n, 0.0));

    Rng rng(derive_seed(spec.seed, seed_stream::kEvent,
                        static_cast<std::uint64_t>(category), static_cast<std::uint64_t>(ordinal)));
    const double log_background = std::log10(spec.background_pfu);
    const double scale = category_amplitude_scale(category, spec);
    for (std::size_t c = 0; c < spec.channels.size(); ++c) {
        const double amplitude = scale * spec.amplitudes[c];
        for (std::size_t i = 0; i < n; ++i) {
            const double mins_before_onset =
                static_cast<double>(n - i) * static_cast<double>(spec.cadence_s) / 60.0;
            const double signal =
                amplitude * std::exp(-spec.lag_decay_per_min * mins_before_onset);
            const double log_flux = log_background + spec.noise_decades * rng.normal() + signal;
            slice.values[c][i] = std::pow(10.0, log_flux);
        }
    }
    return record;
}

}  // namespace

void SyntheticSpec::validate() const {
    if (channels.empty()) throw Error(ErrorKind::InvalidSpec, "synthetic spec needs channels");
    if (amplitudes.size() != channels.size()) {
        throw Error(ErrorKind::InvalidSpec, "one amplitude per channel required");
    }
    for (const double a : amplitudes) {
        if (!(a >= 0.0)) throw Error(ErrorKind::InvalidSpec, "amplitudes must be >= 0");
    }
    if (!(lag_decay_per_min >= 0.0)) {
        throw Error(ErrorKind::InvalidSpec, "lag decay coefficient must be >= 0");
    }
    if (!(weak_amplitude_scale >= 0.0)) {
        throw Error(ErrorKind::InvalidSpec, "weak amplitude scale must be >= 0");
    }
    if (!(background_pfu > 0.0) || !(noise_decades >= 0.0)) {
        throw Error(ErrorKind::InvalidSpec, "background must be > 0 and noise >= 0");
    }
    if (cadence_s <= 0 || !(slice_hours > 0.0)) {
        throw Error(ErrorKind::InvalidSpec, "cadence and slice length must be positive");
    }
    for (const std::size_t n : {n_strong, n_weak, n_noevent}) {
        if (n == 1) {
            throw Error(ErrorKind::InvalidSpec,
                        "each included category needs at least 2 events (or 0 to exclude it)");
        }
    }
    if (n_strong + n_weak + n_noevent == 0) {
        throw Error(ErrorKind::InvalidSpec, "synthetic spec generates no events");
    }
}

std::vector<EventRecord> generate_events(const SyntheticSpec& spec) {
    spec.validate();
    std::vector<EventRecord> records;
    records.reserve(spec.n_strong + spec.n_weak + spec.n_noevent);
    std::size_t global_index = 0;
    const std::pair<EventCategory, std::size_t> groups[] = {
        {EventCategory::Strong, spec.n_strong},
        {EventCategory::Weak, spec.n_weak},
        {EventCategory::NoEvent, spec.n_noevent},
    };
    for (const auto& [category, count] : groups) {
        for (std::size_t k = 0; k < count; ++k) {
            records.push_back(generate_event(spec, category, k, global_index++));
        }
    }
    return records;
}

std::filesystem::path write_synthetic_dataset(const SyntheticSpec& spec,
                                              const std::filesystem::path& out_dir) {
    const std::vector<EventRecord> records = generate_events(spec);

    std::error_code ec;
    std::filesystem::create_directories(out_dir / "slices", ec);
    if (ec) {
        throw Error(ErrorKind::IoFailure,
                    "cannot create '" + (out_dir / "slices").string() + "': " + ec.message());
    }

    nlohmann::json manifest = nlohmann::json::array();
    for (const EventRecord& record : records) {
        const std::string rel = "slices/" + record.event_id + ".csv";
        std::ofstream slice_out(out_dir / rel);
        if (!slice_out) {
            throw Error(ErrorKind::IoFailure, "cannot write slice '" + rel + "'");
        }
        write_slice_csv(record.slice, slice_out);
        manifest.push_back({{"event_id", record.event_id},
                            {"sep_onset", format_iso8601_utc(record.sep_onset)},
                            {"category", to_string(record.category)},
                            {"slice_path", rel}});
    }

    const std::filesystem::path manifest_path = out_dir / "manifest.json";
    std::ofstream manifest_out(manifest_path);
    if (!manifest_out) {
        throw Error(ErrorKind::IoFailure, "cannot write '" + manifest_path.string() + "'");
    }
    manifest_out << manifest.dump(2) << '\n';
    if (!manifest_out) throw Error(ErrorKind::IoFailure, "failed writing manifest");
    return manifest_path;
}

void to_json(nlohmann::json& j, const SyntheticSpec& spec) {
    nlohmann::json channels = nlohmann::json::array();
    for (const ChannelId id : spec.channels) channels.push_back(to_string(id));
    j = nlohmann::json{{"n_strong", spec.n_strong},
                       {"n_weak", spec.n_weak},
                       {"n_noevent", spec.n_noevent},
                       {"channels", std::move(channels)},
                       {"background_pfu", spec.background_pfu},
                       {"noise_decades", spec.noise_decades},
                       {"amplitudes", spec.amplitudes},
                       {"weak_amplitude_scale", spec.weak_amplitude_scale},
                       {"lag_decay_per_min", spec.lag_decay_per_min},
                       {"cadence_s", spec.cadence_s},
                       {"slice_hours", spec.slice_hours},
                       {"seed", spec.seed}};
}

void from_json(const nlohmann::json& j, SyntheticSpec& spec) {
    spec = SyntheticSpec{};
    if (j.contains("n_strong")) spec.n_strong = j.at("n_strong").get<std::size_t>();
    if (j.contains("n_weak")) spec.n_weak = j.at("n_weak").get<std::size_t>();
    if (j.contains("n_noevent")) spec.n_noevent = j.at("n_noevent").get<std::size_t>();
    if (j.contains("channels")) {
        spec.channels.clear();
        for (const auto& name : j.at("channels")) {
            spec.channels.push_back(channel_from_string(name.get<std::string>()));
        }
    }
    if (j.contains("background_pfu")) spec.background_pfu = j.at("background_pfu").get<double>();
    if (j.contains("noise_decades")) spec.noise_decades = j.at("noise_decades").get<double>();
    if (j.contains("amplitudes")) spec.amplitudes = j.at("amplitudes").get<std::vector<double>>();
    if (j.contains("weak_amplitude_scale")) {
        spec.weak_amplitude_scale = j.at("weak_amplitude_scale").get<double>();
    }
    if (j.contains("lag_decay_per_min")) {
        spec.lag_decay_per_min = j.at("lag_decay_per_min").get<double>();
    }
    if (j.contains("cadence_s")) spec.cadence_s = j.at("cadence_s").get<std::int64_t>();
    if (j.contains("slice_hours")) spec.slice_hours = j.at("slice_hours").get<double>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
}

}  // namespace slimtsf
