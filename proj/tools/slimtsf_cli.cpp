// slimtsf command-line harness: run-grid / run-explain / gen-synthetic.
// Errors leave a machine-readable JSON object on stderr and a nonzero exit.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "slimtsf/experiment.hpp"

namespace {

struct CliOverrides {
    std::string config_path;
    std::vector<double> obs_hours;
    std::vector<double> lag_mins;
    std::vector<std::string> scenarios;
    std::optional<std::size_t> runs;
    std::optional<std::size_t> trees;
    std::vector<std::size_t> bootstraps;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string out_dir = "out";
};

void add_common_options(CLI::App* cmd, CliOverrides& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config JSON");
    cmd->add_option("--obs-hours", opts.obs_hours, "observation window hours")->delimiter(',');
    cmd->add_option("--lag-mins", opts.lag_mins, "lag window minutes")->delimiter(',');
    cmd->add_option("--scenario", opts.scenarios,
                    "scenario(s): strong-vs-weak, strong-vs-rest, event-vs-noevent")
        ->delimiter(',');
    cmd->add_option("--runs", opts.runs, "repeated runs per grid cell");
    cmd->add_option("--trees", opts.trees, "trees per forest");
    cmd->add_option("--bootstraps", opts.bootstraps,
                    "bootstrap iteration count(s) for explainability")
        ->delimiter(',');
    cmd->add_option("--seed", opts.seed, "master seed");
    cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
    cmd->add_option("--out", opts.out_dir, "output directory");
}

slimtsf::ExperimentConfig resolve_config(const CliOverrides& opts) {
    slimtsf::ExperimentConfig config;
    if (!opts.config_path.empty()) {
        config = slimtsf::load_config(opts.config_path);
    }
    if (!opts.obs_hours.empty()) config.obs_hours = opts.obs_hours;
    if (!opts.lag_mins.empty()) config.lag_mins = opts.lag_mins;
    if (!opts.scenarios.empty()) {
        config.scenarios.clear();
        for (const std::string& name : opts.scenarios) {
            config.scenarios.push_back(slimtsf::scenario_from_string(name));
        }
    }
    if (opts.runs) config.runs = *opts.runs;
    if (opts.trees) config.forest.n_trees = *opts.trees;
    if (!opts.bootstraps.empty()) config.bootstrap_iterations = opts.bootstraps.front();
    if (opts.seed) config.master_seed = *opts.seed;
    if (opts.threads) config.threads = *opts.threads;
    return config;
}

void print_error_json(const std::string& kind, const std::string& message) {
    nlohmann::json j;
    j["error"] = {{"kind", kind}, {"message", message}};
    std::cerr << j.dump() << std::endl;
}

int run_grid_command(const CliOverrides& opts) {
    const slimtsf::ExperimentConfig config = resolve_config(opts);
    const slimtsf::GridReport report = slimtsf::run_grid(config);
    const auto json_path = slimtsf::export_report(report, opts.out_dir);

    std::size_t ok = 0;
    for (const auto& cell : report.cells) ok += cell.ok ? 1 : 0;
    std::cout << "run-grid: " << ok << "/" << report.cells.size() << " cells ok, report at "
              << json_path.string() << std::endl;
    return 0;
}

int run_explain_command(const CliOverrides& opts) {
    const slimtsf::ExperimentConfig config = resolve_config(opts);
    std::vector<std::size_t> b_list = opts.bootstraps;
    if (b_list.empty()) b_list.push_back(config.bootstrap_iterations);

    const auto results =
        slimtsf::run_explain(config, b_list, std::filesystem::path(opts.out_dir));
    for (const auto& result : results) {
        std::cout << "run-explain: B=" << result.iterations << " channel shares:";
        for (std::size_t ch = 0; ch < result.profile.channels.size(); ++ch) {
            std::printf(" %s=%.4f", result.profile.channels[ch].c_str(),
                        result.profile.channel_share(ch));
        }
        std::cout << std::endl;
    }
    std::cout << "run-explain: exports written to " << opts.out_dir << std::endl;
    return 0;
}

int gen_synthetic_command(const CliOverrides& opts) {
    const slimtsf::ExperimentConfig config = resolve_config(opts);
    if (!config.source.synthetic) {
        throw slimtsf::Error(slimtsf::ErrorKind::InvalidConfig,
                             "gen-synthetic needs source.synthetic in the config");
    }
    slimtsf::SyntheticSpec spec = *config.source.synthetic;
    if (opts.seed) spec.seed = *opts.seed;
    const auto manifest = slimtsf::write_synthetic_dataset(spec, opts.out_dir);
    std::cout << "gen-synthetic: wrote " << manifest.string() << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sliding-window time series forest harness for SEP event classification"};
    app.require_subcommand(1);

    CliOverrides grid_opts, explain_opts, synth_opts;
    CLI::App* grid = app.add_subcommand("run-grid", "run the scenario x window x lag grid");
    add_common_options(grid, grid_opts);
    CLI::App* explain = app.add_subcommand("run-explain", "bootstrap feature-importance analysis");
    add_common_options(explain, explain_opts);
    CLI::App* synth = app.add_subcommand("gen-synthetic", "write a synthetic dataset to disk");
    add_common_options(synth, synth_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error_json("InvalidConfig", e.what());
        return 2;
    }

    try {
        if (grid->parsed()) return run_grid_command(grid_opts);
        if (explain->parsed()) return run_explain_command(explain_opts);
        if (synth->parsed()) return gen_synthetic_command(synth_opts);
    } catch (const slimtsf::Error& e) {
        print_error_json(slimtsf::to_string(e.kind()), e.message());
        return 1;
    } catch (const std::exception& e) {
        print_error_json("Internal", e.what());
        return 1;
    }
    return 0;
}
