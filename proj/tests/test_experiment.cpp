#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "slimtsf/experiment.hpp"

using namespace slimtsf;
namespace fs = std::filesystem;

namespace {

SyntheticSpec small_spec() {
    SyntheticSpec spec;
    spec.n_strong = 8;
    spec.n_weak = 8;
    spec.n_noevent = 8;
    spec.amplitudes = {2.0, 0.0, 0.0};
    spec.lag_decay_per_min = 0.005;
    spec.slice_hours = 9.0;
    spec.seed = 42;
    return spec;
}

ExperimentConfig small_config() {
    ExperimentConfig config;
    config.scenarios = {Scenario::StrongVsWeak};
    config.obs_hours = {6.0};
    config.lag_mins = {5.0};
    config.runs = 2;
    config.forest.n_trees = 15;
    config.master_seed = 9;
    config.threads = 1;
    config.source.synthetic = small_spec();
    return config;
}

fs::path make_temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("slimtsf_exp_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("synthetic generation is deterministic and well-formed") {
    const SyntheticSpec spec = small_spec();
    const auto events = generate_events(spec);
    REQUIRE(events.size() == 24);
    CHECK(events[0].category == EventCategory::Strong);
    CHECK(events[8].category == EventCategory::Weak);
    CHECK(events[16].category == EventCategory::NoEvent);
    for (const EventRecord& event : events) {
        CHECK(event.slice.channels.size() == 3);
        CHECK(event.slice.end_time() <= event.sep_onset);
        CHECK(event.slice.length() == 9 * 60);
        for (const auto& col : event.slice.values) {
            for (const double v : col) CHECK(v > 0.0);
        }
    }
    const auto again = generate_events(spec);
    CHECK(again.size() == events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        CHECK(again[i].slice == events[i].slice);
    }

    SyntheticSpec bad = spec;
    bad.n_weak = 1;
    CHECK_THROWS_WITH_AS(generate_events(bad), doctest::Contains("InvalidSpec"), Error);
    bad = spec;
    bad.amplitudes = {1.0};
    CHECK_THROWS_AS(generate_events(bad), Error);
}

TEST_CASE("file round-trip equals in-memory generation") {
    const SyntheticSpec spec = small_spec();
    const fs::path dir = make_temp_dir("roundtrip");
    const fs::path manifest = write_synthetic_dataset(spec, dir);
    const auto from_files = parse_manifest(manifest);
    const auto in_memory = generate_events(spec);
    REQUIRE(from_files.size() == in_memory.size());
    for (std::size_t i = 0; i < in_memory.size(); ++i) {
        CHECK(from_files[i].event_id == in_memory[i].event_id);
        CHECK(from_files[i].sep_onset == in_memory[i].sep_onset);
        CHECK(from_files[i].category == in_memory[i].category);
        CHECK(from_files[i].slice == in_memory[i].slice);
    }
}

TEST_CASE("run_grid single cell") {
    const ExperimentConfig config = small_config();
    const GridReport report = run_grid(config);
    REQUIRE(report.cells.size() == 1);
    const CellResult& cell = report.cells.front();
    CHECK(cell.ok);
    CHECK(cell.n_instances == 16);
    CHECK(cell.n_positive == 8);
    CHECK(cell.n_negative == 8);
    CHECK(cell.excluded == 8);  // NoEvent records under strong-vs-weak
    CHECK(cell.run_reports.size() == 2);
    CHECK(cell.scores.count("tss") == 1);

    // a strong signal at 5 min lag separates cleanly
    REQUIRE(cell.scores.at("tss").mean.has_value());
    CHECK(*cell.scores.at("tss").mean > 0.5);
}

TEST_CASE("run_grid is deterministic across thread counts") {
    ExperimentConfig config = small_config();
    config.scenarios = {Scenario::StrongVsWeak, Scenario::EventVsNoEvent};
    config.lag_mins = {5.0, 60.0};
    config.threads = 1;
    const std::string sequential = report_to_json(run_grid(config)).dump(2);
    config.threads = 4;
    const std::string threaded = report_to_json(run_grid(config)).dump(2);
    CHECK(sequential == threaded);
}

TEST_CASE("grid completeness with failing cells") {
    ExperimentConfig config = small_config();
    // second lag is uncuttable: obs+lag exceeds the 9 h slice
    config.lag_mins = {5.0, 300.0};
    const GridReport report = run_grid(config);
    REQUIRE(report.cells.size() == 2);
    CHECK(report.cells[0].ok);
    CHECK_FALSE(report.cells[1].ok);
    CHECK(!report.cells[1].failure.empty());

    // every cell failing raises NoValidCells
    config.lag_mins = {300.0};
    CHECK_THROWS_WITH_AS(run_grid(config), doctest::Contains("NoValidCells"), Error);
}

TEST_CASE("decay zero gives a flat TSS-vs-lag profile") {
    ExperimentConfig config = small_config();
    config.lag_mins = {5.0, 180.0};
    config.runs = 5;
    config.forest.n_trees = 30;
    SyntheticSpec spec = small_spec();
    spec.amplitudes = {1.5, 0.0, 0.0};
    spec.lag_decay_per_min = 0.0;
    spec.slice_hours = 10.0;
    config.source.synthetic = spec;

    const GridReport report = run_grid(config);
    REQUIRE(report.cells.size() == 2);
    const double near = *report.cells[0].scores.at("tss").mean;
    const double far = *report.cells[1].scores.at("tss").mean;
    CHECK(near > 0.8);  // strong signal separates at any lag
    CHECK(std::abs(near - far) < 0.2);
}

TEST_CASE("null signal: per-run TSS straddles zero") {
    ExperimentConfig config = small_config();
    config.runs = 20;
    config.forest.n_trees = 30;
    SyntheticSpec spec = small_spec();
    spec.n_strong = 12;
    spec.n_weak = 12;
    spec.n_noevent = 0;
    spec.amplitudes = {0.0, 0.0, 0.0};
    config.source.synthetic = spec;

    const GridReport report = run_grid(config);
    double lo = 1.0, hi = -1.0;
    for (const SkillReport& run : report.cells.front().run_reports) {
        REQUIRE(run.tss.has_value());
        lo = std::min(lo, *run.tss);
        hi = std::max(hi, *run.tss);
    }
    CHECK(lo < 0.0);
    CHECK(hi > 0.0);
}

TEST_CASE("report export and JSON round-trip") {
    ExperimentConfig config = small_config();
    config.lag_mins = {5.0, 15.0};
    const GridReport report = run_grid(config);
    const fs::path dir = make_temp_dir("export");
    const fs::path json_path = export_report(report, dir);

    // CSV: one row per cell x score plus header
    std::ifstream csv(dir / "grid_report.csv");
    REQUIRE(csv.good());
    std::string line;
    std::size_t rows = 0;
    std::getline(csv, line);
    CHECK(line == "scenario,obs_hours,lag_mins,score_name,mean,std,n_defined");
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == report.cells.size() * 7);

    // JSON round-trip reproduces the document byte for byte
    std::ifstream json_in(json_path);
    nlohmann::json doc = nlohmann::json::parse(json_in);
    const GridReport back = report_from_json(doc);
    CHECK(report_to_json(back).dump(2) == doc.dump(2));
}

TEST_CASE("default grids span 3 scenarios x 3 observations x 7 lags") {
    const ExperimentConfig defaults;
    CHECK(defaults.scenarios.size() == 3);
    CHECK(defaults.obs_hours == std::vector<double>{6.0, 8.0, 10.0});
    CHECK(defaults.lag_mins == std::vector<double>{5.0, 15.0, 30.0, 45.0, 60.0, 120.0, 180.0});
    CHECK(defaults.runs == 10);
    CHECK(defaults.scenarios.size() * defaults.obs_hours.size() * defaults.lag_mins.size() == 63);
}

TEST_CASE("config JSON round-trip and validation") {
    ExperimentConfig config = small_config();
    config.extraction.scales = {{30, 15}, {60, 30}};
    config.extraction.pool_size = 4;
    const nlohmann::json j = config_to_json(config);
    const ExperimentConfig back = config_from_json(j);
    CHECK(config_to_json(back).dump() == j.dump());

    ExperimentConfig bad = config;
    bad.runs = 0;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("InvalidConfig"), Error);
    bad = config;
    bad.source.synthetic.reset();
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = config;
    bad.obs_hours = {};
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("run_explain writes per-B exports") {
    ExperimentConfig config = small_config();
    config.forest.n_trees = 10;
    const fs::path dir = make_temp_dir("explain");
    const auto results = run_explain(config, {1, 5}, dir);
    REQUIRE(results.size() == 2);
    CHECK(results[0].iterations == 1);
    CHECK(results[1].iterations == 5);
    CHECK(results[1].cumulative.iterations == 5);
    CHECK(fs::exists(dir / "importance_ledger_B1.csv"));
    CHECK(fs::exists(dir / "channel_profile_B1.csv"));
    CHECK(fs::exists(dir / "importance_ledger_B5.csv"));
    CHECK(fs::exists(dir / "channel_profile_B5.csv"));

    // signal lives in p3 only; its share must dominate
    CHECK(results[1].profile.channel_share(0) > 0.5);

    // a multi-cell config is rejected
    ExperimentConfig multi = config;
    multi.lag_mins = {5.0, 15.0};
    CHECK_THROWS_WITH_AS(run_explain(multi, {1}, std::nullopt),
                         doctest::Contains("InvalidConfig"), Error);
}

TEST_CASE("run_explain covers the full profile-point list") {
    ExperimentConfig config = small_config();
    config.source.synthetic->n_noevent = 0;
    config.source.synthetic->n_strong = 6;
    config.source.synthetic->n_weak = 6;
    config.forest.n_trees = 10;
    const fs::path dir = make_temp_dir("profile_points");
    const auto results = run_explain(config, {1, 10, 100, 1000}, dir);
    REQUIRE(results.size() == 4);
    for (const std::size_t b : {1, 10, 100, 1000}) {
        CHECK(fs::exists(dir / ("importance_ledger_B" + std::to_string(b) + ".csv")));
        CHECK(fs::exists(dir / ("channel_profile_B" + std::to_string(b) + ".csv")));
    }
    // cumulative mass grows linearly with B under per-iteration normalization
    for (const ExplainResult& result : results) {
        double total = 0.0;
        for (const double v : result.cumulative.cumulative) total += v;
        CHECK(std::abs(total - static_cast<double>(result.iterations)) <= 1e-6);
    }
}

TEST_CASE("CSV rows for undefined scores stay empty") {
    GridReport report;
    report.config = small_config();
    CellResult cell;
    cell.scenario = Scenario::StrongVsWeak;
    cell.obs_hours = 6.0;
    cell.lag_mins = 5.0;
    cell.ok = true;
    for (const char* name : kScoreNames) cell.scores[name] = ScoreStats{};
    report.cells.push_back(cell);

    const fs::path dir = make_temp_dir("empty_scores");
    export_report(report, dir);
    std::ifstream csv(dir / "grid_report.csv");
    std::string line;
    std::getline(csv, line);  // header
    std::getline(csv, line);
    CHECK(line == "strong-vs-weak,6,5,tss,,,0");
}

TEST_CASE("B=1 explain equals one bootstrap record") {
    ExperimentConfig config = small_config();
    config.forest.n_trees = 10;
    const auto results = run_explain(config, {1}, std::nullopt);
    REQUIRE(results.size() == 1);
    double total = 0.0;
    for (const double v : results[0].cumulative.cumulative) total += v;
    CHECK(std::abs(total - 1.0) <= 1e-9);
}
