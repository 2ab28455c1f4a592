#include "slimtsf/experiment.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "slimtsf/parallel.hpp"
#include "slimtsf/rng.hpp"

namespace slimtsf {

namespace {

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

void append_double(std::string& out, double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

struct CellDataset {
    FeatureDataset features;
    std::size_t excluded = 0;
    std::size_t cut_failures = 0;
};

CellDataset build_cell_dataset(std::span<const EventRecord> events, Scenario scenario,
                               const WindowSpec& window, const ExperimentConfig& config) {
    ScenarioResult scenario_result = apply_scenario(events, scenario, window);
    for (LabeledInstance& instance : scenario_result.instances) {
        instance.window = log_transform(instance.window, config.log_floor_pfu);
    }
    CellDataset cell;
    cell.excluded = scenario_result.excluded;
    cell.cut_failures = scenario_result.cut_failures;
    cell.features = extract_dataset(scenario_result.instances, config.extraction);
    return cell;
}

ScoreStats stats_for(const std::vector<SkillReport>& reports, const std::string& name) {
    ScoreStats stats;
    std::vector<double> defined;
    for (const SkillReport& report : reports) {
        if (const auto v = report.by_name(name)) defined.push_back(*v);
    }
    stats.n_defined = defined.size();
    if (defined.empty()) return stats;
    double sum = 0.0;
    for (const double v : defined) sum += v;
    const double mean = sum / static_cast<double>(defined.size());
    stats.mean = mean;
    if (defined.size() >= 2) {
        double ss = 0.0;
        for (const double v : defined) ss += (v - mean) * (v - mean);
        stats.stddev = std::sqrt(ss / static_cast<double>(defined.size() - 1));
    }
    return stats;
}

std::vector<EventRecord> resolve_events(const DataSource& source) {
    if (source.manifest.has_value() == source.synthetic.has_value()) {
        throw Error(ErrorKind::InvalidConfig,
                    "exactly one of source.manifest / source.synthetic must be set");
    }
    if (source.manifest) return parse_manifest(*source.manifest);
    return generate_events(*source.synthetic);
}

void put_stats(nlohmann::json& j, const ScoreStats& stats) {
    j["n_defined"] = stats.n_defined;
    j["mean"] = stats.mean ? nlohmann::json(*stats.mean) : nlohmann::json(nullptr);
    j["std"] = stats.stddev ? nlohmann::json(*stats.stddev) : nlohmann::json(nullptr);
}

ScoreStats get_stats(const nlohmann::json& j) {
    ScoreStats stats;
    stats.n_defined = j.at("n_defined").get<std::size_t>();
    if (!j.at("mean").is_null()) stats.mean = j.at("mean").get<double>();
    if (!j.at("std").is_null()) stats.stddev = j.at("std").get<double>();
    return stats;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (scenarios.empty() || obs_hours.empty() || lag_mins.empty()) {
        throw Error(ErrorKind::InvalidConfig, "scenario/observation/lag grids must be non-empty");
    }
    for (const double h : obs_hours) {
        if (!(h > 0.0)) throw Error(ErrorKind::InvalidConfig, "observation hours must be > 0");
    }
    for (const double m : lag_mins) {
        if (!(m >= 0.0)) throw Error(ErrorKind::InvalidConfig, "lag minutes must be >= 0");
    }
    if (runs < 1) throw Error(ErrorKind::InvalidConfig, "runs must be >= 1");
    if (bootstrap_iterations < 1) {
        throw Error(ErrorKind::InvalidConfig, "bootstrap_iterations must be >= 1");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorKind::InvalidConfig, "train_fraction must lie in (0, 1)");
    }
    if (!(log_floor_pfu > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "log_floor_pfu must be > 0");
    }
    if (threads < 0) throw Error(ErrorKind::InvalidConfig, "threads must be >= 0");
    if (source.manifest.has_value() == source.synthetic.has_value()) {
        throw Error(ErrorKind::InvalidConfig,
                    "exactly one of source.manifest / source.synthetic must be set");
    }
    if (source.synthetic) source.synthetic->validate();
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
    nlohmann::json j;
    nlohmann::json scenarios = nlohmann::json::array();
    for (const Scenario s : config.scenarios) scenarios.push_back(to_string(s));
    j["scenarios"] = std::move(scenarios);
    j["obs_hours"] = config.obs_hours;
    j["lag_mins"] = config.lag_mins;
    j["runs"] = config.runs;
    j["bootstrap_iterations"] = config.bootstrap_iterations;
    j["forest"] = {{"n_trees", config.forest.n_trees},
                   {"max_features", config.forest.max_features},
                   {"min_samples_leaf", config.forest.min_samples_leaf},
                   {"max_depth", config.forest.max_depth}};
    nlohmann::json scales = nlohmann::json::array();
    for (const ScaleSpec& s : config.extraction.scales) {
        scales.push_back({{"width", s.width}, {"stride", s.stride}});
    }
    j["extraction"] = {{"scales", std::move(scales)},
                       {"pool_size", config.extraction.pool_size},
                       {"include_pooled", config.extraction.include_pooled}};
    // threads is a runtime knob, not an experiment parameter; leaving it out
    // keeps reports byte-identical across thread counts
    j["train_fraction"] = config.train_fraction;
    j["log_floor_pfu"] = config.log_floor_pfu;
    j["master_seed"] = config.master_seed;
    nlohmann::json source;
    if (config.source.manifest) source["manifest"] = config.source.manifest->string();
    if (config.source.synthetic) source["synthetic"] = *config.source.synthetic;
    j["source"] = std::move(source);
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig config;
    try {
        if (j.contains("scenarios")) {
            config.scenarios.clear();
            for (const auto& name : j.at("scenarios")) {
                config.scenarios.push_back(scenario_from_string(name.get<std::string>()));
            }
        }
        if (j.contains("obs_hours")) config.obs_hours = j.at("obs_hours").get<std::vector<double>>();
        if (j.contains("lag_mins")) config.lag_mins = j.at("lag_mins").get<std::vector<double>>();
        if (j.contains("runs")) config.runs = j.at("runs").get<std::size_t>();
        if (j.contains("bootstrap_iterations")) {
            config.bootstrap_iterations = j.at("bootstrap_iterations").get<std::size_t>();
        }
        if (j.contains("forest")) {
            const auto& f = j.at("forest");
            if (f.contains("n_trees")) config.forest.n_trees = f.at("n_trees").get<std::size_t>();
            if (f.contains("max_features")) {
                config.forest.max_features = f.at("max_features").get<std::size_t>();
            }
            if (f.contains("min_samples_leaf")) {
                config.forest.min_samples_leaf = f.at("min_samples_leaf").get<std::size_t>();
            }
            if (f.contains("max_depth")) config.forest.max_depth = f.at("max_depth").get<std::size_t>();
        }
        if (j.contains("extraction")) {
            const auto& e = j.at("extraction");
            if (e.contains("scales")) {
                config.extraction.scales.clear();
                for (const auto& s : e.at("scales")) {
                    config.extraction.scales.push_back(
                        {s.at("width").get<std::size_t>(), s.at("stride").get<std::size_t>()});
                }
            }
            if (e.contains("pool_size")) {
                config.extraction.pool_size = e.at("pool_size").get<std::size_t>();
            }
            if (e.contains("include_pooled")) {
                config.extraction.include_pooled = e.at("include_pooled").get<bool>();
            }
        }
        if (j.contains("train_fraction")) config.train_fraction = j.at("train_fraction").get<double>();
        if (j.contains("log_floor_pfu")) config.log_floor_pfu = j.at("log_floor_pfu").get<double>();
        if (j.contains("master_seed")) config.master_seed = j.at("master_seed").get<std::uint64_t>();
        if (j.contains("threads")) config.threads = j.at("threads").get<int>();
        if (j.contains("source")) {
            const auto& s = j.at("source");
            if (s.contains("manifest")) {
                config.source.manifest = std::filesystem::path(s.at("manifest").get<std::string>());
            }
            if (s.contains("synthetic")) {
                config.source.synthetic = s.at("synthetic").get<SyntheticSpec>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, "malformed config JSON: " + std::string(e.what()));
    }
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::MissingFile, "cannot open config '" + path.string() + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, "config is not valid JSON: " + std::string(e.what()));
    }
    return config_from_json(doc);
}

GridReport run_grid(const ExperimentConfig& config) {
    config.validate();
    const std::vector<EventRecord> events = resolve_events(config.source);

    struct CellCoord {
        std::size_t scenario_idx, obs_idx, lag_idx;
    };
    std::vector<CellCoord> coords;
    for (std::size_t s = 0; s < config.scenarios.size(); ++s) {
        for (std::size_t o = 0; o < config.obs_hours.size(); ++o) {
            for (std::size_t l = 0; l < config.lag_mins.size(); ++l) coords.push_back({s, o, l});
        }
    }

    GridReport report;
    report.config = config;
    report.cells.resize(coords.size());

    parallel_for(coords.size(), config.threads, [&](std::size_t k) {
        const auto [si, oi, li] = coords[k];
        const Scenario scenario = config.scenarios[si];
        const double obs_hours = config.obs_hours[oi];
        const double lag_mins = config.lag_mins[li];

        CellResult cell;
        cell.scenario = scenario;
        cell.obs_hours = obs_hours;
        cell.lag_mins = lag_mins;
        try {
            const WindowSpec window = WindowSpec::hours_mins(obs_hours, lag_mins);
            const CellDataset data = build_cell_dataset(events, scenario, window, config);
            const FeatureDataset& fd = data.features;
            cell.excluded = data.excluded;
            cell.cut_failures = data.cut_failures;
            cell.n_instances = fd.x.rows();
            cell.n_features = fd.x.cols();
            for (const int y : fd.labels) (y == 1 ? cell.n_positive : cell.n_negative) += 1;

            // All randomness flows from (master seed, cell coordinates, run).
            const std::uint64_t scenario_ord = static_cast<std::uint64_t>(scenario);
            for (std::size_t run = 0; run < config.runs; ++run) {
                const std::uint64_t split_seed =
                    derive_seed(config.master_seed, seed_stream::kSplit, scenario_ord,
                                bits(obs_hours), bits(lag_mins), static_cast<std::uint64_t>(run));
                const SplitIndices split =
                    stratified_split(fd.labels, config.train_fraction, split_seed);

                const DataMatrix train_x = fd.x.select_rows(split.train);
                std::vector<int> train_y(split.train.size());
                for (std::size_t i = 0; i < split.train.size(); ++i) {
                    train_y[i] = fd.labels[split.train[i]];
                }

                ForestHyperparams hp = config.forest;
                hp.seed = derive_seed(config.master_seed, seed_stream::kRunForest, scenario_ord,
                                      bits(obs_hours), bits(lag_mins),
                                      static_cast<std::uint64_t>(run));
                const Forest forest = fit_forest(train_x, train_y, hp, 1);

                std::vector<int> predictions(split.test.size());
                std::vector<int> truth(split.test.size());
                for (std::size_t i = 0; i < split.test.size(); ++i) {
                    const std::vector<double> row = fd.x.row(split.test[i]);
                    predictions[i] = predict(forest, row);
                    truth[i] = fd.labels[split.test[i]];
                }
                cell.run_reports.push_back(SkillReport::from(contingency(predictions, truth)));
            }
            for (const char* name : kScoreNames) {
                cell.scores[name] = stats_for(cell.run_reports, name);
            }
            cell.ok = true;
        } catch (const Error& e) {
            cell.ok = false;
            cell.failure = e.what();
        }
        report.cells[k] = std::move(cell);
    });

    if (std::none_of(report.cells.begin(), report.cells.end(),
                     [](const CellResult& c) { return c.ok; })) {
        throw Error(ErrorKind::NoValidCells, "every grid cell failed");
    }
    return report;
}

nlohmann::json report_to_json(const GridReport& report) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["config"] = config_to_json(report.config);
    nlohmann::json cells = nlohmann::json::array();
    for (const CellResult& cell : report.cells) {
        nlohmann::json c;
        c["scenario"] = to_string(cell.scenario);
        c["obs_hours"] = cell.obs_hours;
        c["lag_mins"] = cell.lag_mins;
        c["ok"] = cell.ok;
        if (!cell.ok) c["failure"] = cell.failure;
        c["n_instances"] = cell.n_instances;
        c["n_positive"] = cell.n_positive;
        c["n_negative"] = cell.n_negative;
        c["excluded"] = cell.excluded;
        c["cut_failures"] = cell.cut_failures;
        c["n_features"] = cell.n_features;
        c["runs"] = cell.run_reports;
        nlohmann::json scores;
        for (const auto& [name, stats] : cell.scores) put_stats(scores[name], stats);
        c["scores"] = std::move(scores);
        cells.push_back(std::move(c));
    }
    j["cells"] = std::move(cells);
    return j;
}

GridReport report_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format_version").get<int>() != 1) {
            throw Error(ErrorKind::SchemaViolation, "unsupported report format version");
        }
        GridReport report;
        report.config = config_from_json(j.at("config"));
        for (const auto& c : j.at("cells")) {
            CellResult cell;
            cell.scenario = scenario_from_string(c.at("scenario").get<std::string>());
            cell.obs_hours = c.at("obs_hours").get<double>();
            cell.lag_mins = c.at("lag_mins").get<double>();
            cell.ok = c.at("ok").get<bool>();
            if (c.contains("failure")) cell.failure = c.at("failure").get<std::string>();
            cell.n_instances = c.at("n_instances").get<std::size_t>();
            cell.n_positive = c.at("n_positive").get<std::size_t>();
            cell.n_negative = c.at("n_negative").get<std::size_t>();
            cell.excluded = c.at("excluded").get<std::size_t>();
            cell.cut_failures = c.at("cut_failures").get<std::size_t>();
            cell.n_features = c.at("n_features").get<std::size_t>();
            cell.run_reports = c.at("runs").get<std::vector<SkillReport>>();
            for (const auto& [name, stats] : c.at("scores").items()) {
                cell.scores[name] = get_stats(stats);
            }
            report.cells.push_back(std::move(cell));
        }
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::SchemaViolation, "malformed report JSON: " + std::string(e.what()));
    }
}

std::filesystem::path export_report(const GridReport& report,
                                    const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw Error(ErrorKind::IoFailure, "cannot create '" + out_dir.string() + "': " + ec.message());
    }

    const std::filesystem::path json_path = out_dir / "grid_report.json";
    {
        std::ofstream out(json_path);
        if (!out) throw Error(ErrorKind::IoFailure, "cannot write '" + json_path.string() + "'");
        out << report_to_json(report).dump(2) << '\n';
        if (!out) throw Error(ErrorKind::IoFailure, "failed writing grid report JSON");
    }

    const std::filesystem::path csv_path = out_dir / "grid_report.csv";
    std::ofstream out(csv_path);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write '" + csv_path.string() + "'");
    out << "scenario,obs_hours,lag_mins,score_name,mean,std,n_defined\n";
    std::string line;
    for (const CellResult& cell : report.cells) {
        for (const char* name : kScoreNames) {
            line.clear();
            line += to_string(cell.scenario);
            line += ',';
            append_double(line, cell.obs_hours);
            line += ',';
            append_double(line, cell.lag_mins);
            line += ',';
            line += name;
            line += ',';
            const auto it = cell.scores.find(name);
            const ScoreStats stats = it == cell.scores.end() ? ScoreStats{} : it->second;
            if (stats.mean) append_double(line, *stats.mean);
            line += ',';
            if (stats.stddev) append_double(line, *stats.stddev);
            line += ',';
            line += std::to_string(stats.n_defined);
            out << line << '\n';
        }
    }
    if (!out) throw Error(ErrorKind::IoFailure, "failed writing grid report CSV");
    return json_path;
}

std::vector<ExplainResult> run_explain(const ExperimentConfig& config,
                                       const std::vector<std::size_t>& b_list,
                                       const std::optional<std::filesystem::path>& out_dir) {
    config.validate();
    if (config.scenarios.size() != 1 || config.obs_hours.size() != 1 ||
        config.lag_mins.size() != 1) {
        throw Error(ErrorKind::InvalidConfig,
                    "run-explain needs exactly one scenario, observation length, and lag");
    }
    if (b_list.empty()) {
        throw Error(ErrorKind::InvalidConfig, "empty bootstrap iteration list");
    }

    const std::vector<EventRecord> events = resolve_events(config.source);
    const Scenario scenario = config.scenarios.front();
    const double obs_hours = config.obs_hours.front();
    const double lag_mins = config.lag_mins.front();
    const WindowSpec window = WindowSpec::hours_mins(obs_hours, lag_mins);
    const CellDataset data = build_cell_dataset(events, scenario, window, config);
    const FeatureDataset& fd = data.features;

    if (out_dir) {
        std::error_code ec;
        std::filesystem::create_directories(*out_dir, ec);
        if (ec) {
            throw Error(ErrorKind::IoFailure,
                        "cannot create '" + out_dir->string() + "': " + ec.message());
        }
    }

    std::vector<ExplainResult> results;
    results.reserve(b_list.size());
    for (const std::size_t b_count : b_list) {
        const std::uint64_t seed =
            derive_seed(config.master_seed, seed_stream::kExplain,
                        static_cast<std::uint64_t>(scenario), bits(obs_hours), bits(lag_mins),
                        static_cast<std::uint64_t>(b_count));
        const auto records = bootstrap_importances(fd.x, fd.labels, config.forest, b_count, seed,
                                                   config.threads);
        ExplainResult result;
        result.iterations = b_count;
        result.schema = fd.schema;
        result.cumulative = accumulate(records);
        result.profile = channel_profile(result.cumulative, *fd.schema, fd.cadence_s);

        if (out_dir) {
            const std::string suffix = "_B" + std::to_string(b_count) + ".csv";
            {
                std::ofstream ledger(*out_dir / ("importance_ledger" + suffix));
                if (!ledger) throw Error(ErrorKind::IoFailure, "cannot write importance ledger");
                write_importance_ledger_csv(ledger, result.cumulative, *fd.schema, fd.cadence_s);
            }
            std::ofstream profile(*out_dir / ("channel_profile" + suffix));
            if (!profile) throw Error(ErrorKind::IoFailure, "cannot write channel profile");
            write_channel_profile_csv(profile, result.profile);
        }
        results.push_back(std::move(result));
    }
    return results;
}

}  // namespace slimtsf
