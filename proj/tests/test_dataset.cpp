#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "slimtsf/dataset.hpp"
#include "slimtsf/time_util.hpp"

using namespace slimtsf;
namespace fs = std::filesystem;

namespace {

fs::path make_temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("slimtsf_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string simple_slice_csv(std::int64_t start, std::size_t n, double base = 1.0) {
    std::ostringstream out;
    out << "timestamp,p3,p5,p7\n";
    for (std::size_t i = 0; i < n; ++i) {
        out << format_iso8601_utc(start + static_cast<std::int64_t>(i) * 60) << ','
            << base + static_cast<double>(i) << ",0.5,0.25\n";
    }
    return out.str();
}

}  // namespace

TEST_CASE("iso8601 parsing and formatting") {
    CHECK(parse_iso8601_utc("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_iso8601_utc("1970-01-02T00:00:00") == 86400);
    CHECK(parse_iso8601_utc("2003-10-28T11:35Z") == parse_iso8601_utc("2003-10-28T11:35:00Z"));
    const std::int64_t t = parse_iso8601_utc("2011-06-07T06:41:00Z");
    CHECK(format_iso8601_utc(t) == "2011-06-07T06:41:00Z");
    CHECK_THROWS_AS(parse_iso8601_utc("2011-13-01T00:00:00Z"), Error);
    CHECK_THROWS_AS(parse_iso8601_utc("garbage"), Error);
}

TEST_CASE("slice parsing with an interior gap") {
    // 3-sample gap between anchors 1.0 (00:00) and 5.0 (00:04)
    std::istringstream in(
        "timestamp,p3\n"
        "2011-01-01T00:00:00Z,1.0\n"
        "2011-01-01T00:01:00Z,\n"
        "2011-01-01T00:02:00Z,\n"
        "2011-01-01T00:03:00Z,\n"
        "2011-01-01T00:04:00Z,5.0\n");
    const TimeSeriesSlice slice = parse_slice_csv(in, "gap");
    REQUIRE(slice.length() == 5);
    CHECK(slice.cadence_s == 60);
    CHECK(slice.gap_mask == std::vector<bool>{false, true, true, true, false});
    CHECK(slice.values[0][0] == 1.0);
    CHECK(slice.values[0][1] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(slice.values[0][2] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(slice.values[0][3] == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(slice.values[0][4] == 5.0);
    CHECK(slice.max_gap_run() == 3);
}

TEST_CASE("slice parsing treats absent grid rows as missing samples") {
    std::istringstream in(
        "timestamp,p3\n"
        "2011-01-01T00:00:00Z,2.0\n"
        "2011-01-01T00:02:00Z,4.0\n"
        "2011-01-01T00:03:00Z,6.0\n");
    const TimeSeriesSlice slice = parse_slice_csv(in, "skipped");
    REQUIRE(slice.length() == 4);
    CHECK(slice.cadence_s == 60);
    CHECK(slice.gap_mask == std::vector<bool>{false, true, false, false});
    CHECK(slice.values[0][1] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("slice parser rejections") {
    std::istringstream decreasing(
        "timestamp,p3\n"
        "2011-01-01T00:02:00Z,1.0\n"
        "2011-01-01T00:01:00Z,2.0\n");
    CHECK_THROWS_WITH_AS(parse_slice_csv(decreasing, "x"),
                         doctest::Contains("NonMonotonicTimestamps"), Error);

    std::istringstream single("timestamp,p3\n2011-01-01T00:00:00Z,1.0\n");
    CHECK_THROWS_WITH_AS(parse_slice_csv(single, "x"), doctest::Contains("SchemaViolation"),
                         Error);

    std::istringstream bad_channel("timestamp,p9\n2011-01-01T00:00:00Z,1.0\n");
    CHECK_THROWS_AS(parse_slice_csv(bad_channel, "x"), Error);

    std::istringstream bad_value(
        "timestamp,p3\n"
        "2011-01-01T00:00:00Z,abc\n"
        "2011-01-01T00:01:00Z,1.0\n");
    CHECK_THROWS_WITH_AS(parse_slice_csv(bad_value, "x"), doctest::Contains("SchemaViolation"),
                         Error);
}

TEST_CASE("slice CSV round-trip") {
    std::istringstream in(
        "timestamp,p3,p5\n"
        "2011-01-01T00:00:00Z,1.5,0.25\n"
        "2011-01-01T00:01:00Z,,\n"
        "2011-01-01T00:02:00Z,2.75,0.125\n"
        "2011-01-01T00:03:00Z,3.0625,0.0078125\n");
    const TimeSeriesSlice slice = parse_slice_csv(in, "rt");

    std::ostringstream out;
    write_slice_csv(slice, out);
    std::istringstream back(out.str());
    const TimeSeriesSlice reparsed = parse_slice_csv(back, "rt2");
    CHECK(reparsed == slice);
}

TEST_CASE("manifest parsing") {
    const fs::path dir = make_temp_dir("manifest");
    write_file(dir / "strong_0.csv", simple_slice_csv(parse_iso8601_utc("2011-01-01T00:00:00Z"), 10));
    write_file(dir / "manifest.json",
               R"([{"event_id":"strong_0","sep_onset":"2011-01-01T00:10:00Z",)"
               R"("category":"Strong","slice_path":"strong_0.csv"}])");

    const auto records = parse_manifest(dir / "manifest.json");
    REQUIRE(records.size() == 1);
    CHECK(records[0].event_id == "strong_0");
    CHECK(records[0].category == EventCategory::Strong);
    CHECK(records[0].slice.length() == 10);
    CHECK(records[0].slice.end_time() == records[0].sep_onset);

    write_file(dir / "manifest_bad.json",
               R"([{"event_id":"x","sep_onset":"2011-01-01T00:10:00Z",)"
               R"("category":"Medium","slice_path":"strong_0.csv"}])");
    CHECK_THROWS_WITH_AS(parse_manifest(dir / "manifest_bad.json"),
                         doctest::Contains("UnknownCategory"), Error);

    CHECK_THROWS_WITH_AS(parse_manifest(dir / "does_not_exist.json"),
                         doctest::Contains("MissingFile"), Error);

    write_file(dir / "manifest_missing_field.json", R"([{"event_id":"x"}])");
    CHECK_THROWS_WITH_AS(parse_manifest(dir / "manifest_missing_field.json"),
                         doctest::Contains("SchemaViolation"), Error);
}

TEST_CASE("cut_window timestamp arithmetic") {
    // t_sep = 12:00, obs = 6 h, lag = 60 min -> [05:00, 11:00), 360 samples
    EventRecord record;
    record.event_id = "e";
    record.sep_onset = parse_iso8601_utc("2011-01-05T12:00:00Z");
    record.category = EventCategory::Strong;
    const std::int64_t slice_start = parse_iso8601_utc("2011-01-05T00:00:00Z");
    const std::size_t n = 12 * 60;  // 00:00 .. 12:00
    record.slice.start_time = slice_start;
    record.slice.cadence_s = 60;
    record.slice.channels = {ChannelId::P3};
    record.slice.gap_mask.assign(n, false);
    record.slice.values = {std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) record.slice.values[0][i] = static_cast<double>(i);

    const WindowSpec spec = WindowSpec::hours_mins(6, 60);
    const TimeSeriesSlice window = cut_window(record, spec);
    CHECK(window.length() == 360);
    CHECK(window.start_time == parse_iso8601_utc("2011-01-05T05:00:00Z"));
    CHECK(window.end_time() == parse_iso8601_utc("2011-01-05T11:00:00Z"));
    CHECK(window.end_time() - window.start_time == spec.obs_s);
    CHECK(record.sep_onset - window.end_time() == spec.lag_s);
    CHECK(window.values[0].front() == 300.0);  // sample at 05:00
    CHECK(window.values[0].back() == 659.0);   // sample at 10:59

    // lag = 0: window ends exactly at t_sep
    const TimeSeriesSlice zero_lag = cut_window(record, WindowSpec::hours_mins(6, 0));
    CHECK(zero_lag.end_time() == record.sep_onset);
    CHECK(zero_lag.values[0].back() == 719.0);

    // source covering 5 h cannot produce a 6 h window at lag 0
    EventRecord short_record = record;
    short_record.slice.gap_mask.assign(300, false);
    short_record.slice.values = {std::vector<double>(300, 1.0)};
    short_record.slice.start_time = record.sep_onset - 300 * 60;
    CHECK_THROWS_WITH_AS(cut_window(short_record, WindowSpec::hours_mins(6, 0)),
                         doctest::Contains("InsufficientCoverage"), Error);
}

TEST_CASE("cut_window windowing arithmetic property") {
    EventRecord record;
    record.sep_onset = parse_iso8601_utc("2011-02-01T18:00:00Z");
    const std::size_t n = 15 * 60;
    record.slice.start_time = record.sep_onset - static_cast<std::int64_t>(n) * 60;
    record.slice.cadence_s = 60;
    record.slice.channels = {ChannelId::P3};
    record.slice.gap_mask.assign(n, false);
    record.slice.values = {std::vector<double>(n, 1.0)};

    for (const double obs_hours : {6.0, 8.0, 10.0}) {
        for (const double lag : {5.0, 15.0, 30.0, 45.0, 60.0, 120.0, 180.0}) {
            const WindowSpec spec = WindowSpec::hours_mins(obs_hours, lag);
            const TimeSeriesSlice window = cut_window(record, spec);
            CHECK(window.end_time() - window.start_time == spec.obs_s);
            CHECK(record.sep_onset - window.end_time() == spec.lag_s);
            CHECK(window.length() ==
                  static_cast<std::size_t>(spec.obs_s / record.slice.cadence_s));
        }
    }
}

TEST_CASE("cut_window rejects slices with long gaps") {
    EventRecord record;
    record.sep_onset = 86400;
    const std::size_t n = 600;
    record.slice.start_time = record.sep_onset - static_cast<std::int64_t>(n) * 60;
    record.slice.cadence_s = 60;
    record.slice.channels = {ChannelId::P3};
    record.slice.gap_mask.assign(n, false);
    for (std::size_t i = 100; i < 100 + kMaxInterpolatedGap + 1; ++i) record.slice.gap_mask[i] = true;
    record.slice.values = {std::vector<double>(n, 1.0)};
    CHECK_THROWS_WITH_AS(cut_window(record, WindowSpec::hours_mins(6, 5)),
                         doctest::Contains("ExcessiveGap"), Error);
}

TEST_CASE("scenario role mapping and apply_scenario") {
    std::vector<EventRecord> records;
    const std::int64_t onset = parse_iso8601_utc("2011-03-01T12:00:00Z");
    auto add = [&](EventCategory category, int k) {
        EventRecord r;
        r.event_id = std::string(to_string(category)) + std::to_string(k);
        r.sep_onset = onset;
        r.category = category;
        const std::size_t n = 8 * 60;
        r.slice.start_time = onset - static_cast<std::int64_t>(n) * 60;
        r.slice.cadence_s = 60;
        r.slice.channels = {ChannelId::P3};
        r.slice.gap_mask.assign(n, false);
        r.slice.values = {std::vector<double>(n, 1.0)};
        records.push_back(std::move(r));
    };
    for (int k = 0; k < 2; ++k) add(EventCategory::Strong, k);
    for (int k = 0; k < 3; ++k) add(EventCategory::Weak, k);
    for (int k = 0; k < 4; ++k) add(EventCategory::NoEvent, k);

    const WindowSpec spec = WindowSpec::hours_mins(6, 5);

    const ScenarioResult svw = apply_scenario(records, Scenario::StrongVsWeak, spec);
    CHECK(svw.instances.size() == 5);
    CHECK(svw.excluded == 4);
    CHECK(svw.cut_failures == 0);
    std::size_t positives = 0;
    for (const auto& inst : svw.instances) positives += inst.label == 1 ? 1 : 0;
    CHECK(positives == 2);

    const ScenarioResult evn = apply_scenario(records, Scenario::EventVsNoEvent, spec);
    CHECK(evn.instances.size() == 9);
    positives = 0;
    for (const auto& inst : evn.instances) positives += inst.label == 1 ? 1 : 0;
    CHECK(positives == 5);

    const ScenarioResult svr = apply_scenario(records, Scenario::StrongVsRest, spec);
    CHECK(svr.instances.size() == 9);
    positives = 0;
    for (const auto& inst : svr.instances) positives += inst.label == 1 ? 1 : 0;
    CHECK(positives == 2);

    const std::vector<EventRecord> only_noevent(records.begin() + 5, records.end());
    CHECK_THROWS_WITH_AS(apply_scenario(only_noevent, Scenario::StrongVsWeak, spec),
                         doctest::Contains("EmptyResult"), Error);

    // partition property: every record lands in exactly one bucket
    for (const Scenario scenario :
         {Scenario::StrongVsWeak, Scenario::StrongVsRest, Scenario::EventVsNoEvent}) {
        const ScenarioResult r = apply_scenario(records, scenario, spec);
        CHECK(r.instances.size() + r.excluded + r.cut_failures == records.size());
    }
}

TEST_CASE("log transform") {
    TimeSeriesSlice slice;
    slice.start_time = 0;
    slice.cadence_s = 60;
    slice.channels = {ChannelId::P3};
    slice.values = {{100.0, 10.0, 1.0, 0.0, 5.0, 50.0}};
    slice.gap_mask.assign(6, false);
    slice.gap_mask[3] = true;

    const TimeSeriesSlice logged = log_transform(slice, 1e-3);
    CHECK(logged.values[0][0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(logged.values[0][1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(logged.values[0][2] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(logged.values[0][3] == doctest::Approx(-3.0).epsilon(1e-15));  // floor clamp
    CHECK(logged.values[0][4] == doctest::Approx(std::log10(5.0)).epsilon(1e-15));
    CHECK(logged.values[0][5] == doctest::Approx(std::log10(50.0)).epsilon(1e-15));
    CHECK(logged.gap_mask == slice.gap_mask);
    CHECK(logged.channels == slice.channels);

    CHECK_THROWS_AS(log_transform(slice, 0.0), Error);

    // monotone non-decreasing in the input value
    for (std::size_t i = 1; i < 6; ++i) {
        if (slice.values[0][i - 1] <= slice.values[0][i]) {
            CHECK(logged.values[0][i - 1] <= logged.values[0][i]);
        }
    }
}

TEST_CASE("stratified split") {
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) labels.push_back(i < 24 ? 1 : 0);

    const SplitIndices split = stratified_split(labels, 0.5, 7);
    CHECK(split.train.size() == 20);
    CHECK(split.test.size() == 20);
    std::size_t train_pos = 0;
    for (const std::size_t i : split.train) train_pos += labels[i] == 1 ? 1 : 0;
    CHECK(train_pos == 12);

    // deterministic and disjoint
    const SplitIndices again = stratified_split(labels, 0.5, 7);
    CHECK(again.train == split.train);
    CHECK(again.test == split.test);
    std::vector<std::size_t> all = split.train;
    all.insert(all.end(), split.test.begin(), split.test.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);

    const SplitIndices other_seed = stratified_split(labels, 0.5, 8);
    CHECK(other_seed.train != split.train);

    // tiny classes keep one member on each side
    const std::vector<int> tiny = {1, 1, 0, 0};
    const SplitIndices tiny_split = stratified_split(tiny, 0.5, 1);
    CHECK(tiny_split.train.size() == 2);
    CHECK(tiny_split.test.size() == 2);
}
