// Python bindings for the slimtsf core. Matrices cross the boundary as lists
// of row lists; configs and reports move as JSON strings so the python side
// stays schema-compatible with the CLI.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "slimtsf/experiment.hpp"

namespace py = pybind11;
using namespace slimtsf;

namespace {

std::vector<std::vector<double>> matrix_to_rows(const DataMatrix& m) {
    std::vector<std::vector<double>> rows(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) rows[r] = m.row(r);
    return rows;
}

py::object opt_to_py(const std::optional<double>& v) {
    if (v) return py::float_(*v);
    return py::none();
}

py::dict skill_report_to_dict(const SkillReport& report) {
    py::dict d;
    d["tss"] = opt_to_py(report.tss);
    d["hss"] = opt_to_py(report.hss);
    d["css"] = opt_to_py(report.css);
    d["gss"] = opt_to_py(report.gss);
    d["precision"] = opt_to_py(report.precision);
    d["recall"] = opt_to_py(report.recall);
    d["f1"] = opt_to_py(report.f1);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sliding-window multivariate time series forest for SEP event classification";

    py::register_exception<Error>(m, "SlimTsfError");

    py::enum_<ChannelId>(m, "ChannelId")
        .value("P3", ChannelId::P3)
        .value("P5", ChannelId::P5)
        .value("P7", ChannelId::P7)
        .value("XL", ChannelId::XL);

    py::enum_<EventCategory>(m, "EventCategory")
        .value("Strong", EventCategory::Strong)
        .value("Weak", EventCategory::Weak)
        .value("NoEvent", EventCategory::NoEvent);

    py::enum_<Scenario>(m, "Scenario")
        .value("StrongVsWeak", Scenario::StrongVsWeak)
        .value("StrongVsRest", Scenario::StrongVsRest)
        .value("EventVsNoEvent", Scenario::EventVsNoEvent);

    py::class_<TimeSeriesSlice>(m, "TimeSeriesSlice")
        .def(py::init<>())
        .def_readwrite("start_time", &TimeSeriesSlice::start_time)
        .def_readwrite("cadence_s", &TimeSeriesSlice::cadence_s)
        .def_readwrite("channels", &TimeSeriesSlice::channels)
        .def_readwrite("values", &TimeSeriesSlice::values)
        .def_readwrite("gap_mask", &TimeSeriesSlice::gap_mask)
        .def("length", &TimeSeriesSlice::length)
        .def("end_time", &TimeSeriesSlice::end_time)
        .def("max_gap_run", &TimeSeriesSlice::max_gap_run);

    py::class_<EventRecord>(m, "EventRecord")
        .def(py::init<>())
        .def_readwrite("event_id", &EventRecord::event_id)
        .def_readwrite("sep_onset", &EventRecord::sep_onset)
        .def_readwrite("category", &EventRecord::category)
        .def_readwrite("slice", &EventRecord::slice);

    py::class_<WindowSpec>(m, "WindowSpec")
        .def(py::init<>())
        .def_static("hours_mins", &WindowSpec::hours_mins, py::arg("obs_hours"),
                    py::arg("lag_mins"))
        .def_readwrite("obs_s", &WindowSpec::obs_s)
        .def_readwrite("lag_s", &WindowSpec::lag_s);

    py::class_<LabeledInstance>(m, "LabeledInstance")
        .def(py::init<>())
        .def_readwrite("event_id", &LabeledInstance::event_id)
        .def_readwrite("window", &LabeledInstance::window)
        .def_readwrite("label", &LabeledInstance::label);

    m.def("parse_manifest", &parse_manifest, py::arg("path"));
    m.def("parse_slice_csv", &parse_slice_csv_file, py::arg("path"));
    m.def("cut_window", &cut_window, py::arg("record"), py::arg("spec"));
    m.def(
        "apply_scenario",
        [](const std::vector<EventRecord>& records, Scenario scenario, const WindowSpec& spec) {
            const ScenarioResult result = apply_scenario(records, scenario, spec);
            return py::make_tuple(result.instances, result.excluded, result.cut_failures);
        },
        py::arg("records"), py::arg("scenario"), py::arg("spec"),
        "Returns (instances, excluded, cut_failures)");
    m.def("log_transform", &log_transform, py::arg("slice"), py::arg("floor_pfu") = 1e-3);
    m.def(
        "stratified_split",
        [](const std::vector<int>& labels, double train_fraction, std::uint64_t seed) {
            const SplitIndices split = stratified_split(labels, train_fraction, seed);
            return py::make_tuple(split.train, split.test);
        },
        py::arg("labels"), py::arg("train_fraction") = 0.5, py::arg("seed") = 0);

    // interval features
    py::class_<ScaleSpec>(m, "ScaleSpec")
        .def(py::init<std::size_t, std::size_t>(), py::arg("width"), py::arg("stride"))
        .def_readwrite("width", &ScaleSpec::width)
        .def_readwrite("stride", &ScaleSpec::stride);

    py::class_<ExtractionConfig>(m, "ExtractionConfig")
        .def(py::init<>())
        .def_readwrite("scales", &ExtractionConfig::scales)
        .def_readwrite("pool_size", &ExtractionConfig::pool_size)
        .def_readwrite("include_pooled", &ExtractionConfig::include_pooled);

    m.def(
        "interval_mean",
        [](const std::vector<double>& v, std::size_t s, std::size_t e) {
            return interval_mean(v, s, e);
        },
        py::arg("values"), py::arg("start"), py::arg("end"));
    m.def(
        "interval_std",
        [](const std::vector<double>& v, std::size_t s, std::size_t e) {
            return interval_std(v, s, e);
        },
        py::arg("values"), py::arg("start"), py::arg("end"));
    m.def(
        "interval_slope",
        [](const std::vector<double>& v, std::size_t s, std::size_t e) {
            return interval_slope(v, s, e);
        },
        py::arg("values"), py::arg("start"), py::arg("end"));
    m.def(
        "generate_intervals",
        [](std::size_t n, const ExtractionConfig& config) {
            std::vector<py::tuple> out;
            for (const Interval& iv : generate_intervals(n, config)) {
                out.push_back(py::make_tuple(iv.scale, iv.index, iv.start, iv.end));
            }
            return out;
        },
        py::arg("n"), py::arg("config") = ExtractionConfig{},
        "Returns (scale, index, start, end) tuples, 0-based inclusive");
    m.def(
        "pool_consecutive",
        [](const std::vector<double>& stream, std::size_t pool_size) {
            std::vector<py::tuple> out;
            for (const PooledGroup& g : pool_consecutive(stream, pool_size)) {
                out.push_back(py::make_tuple(g.max, g.min, g.mean));
            }
            return out;
        },
        py::arg("stream"), py::arg("pool_size") = 3, "Returns (max, min, mean) per group");

    py::class_<FeatureDataset>(m, "FeatureDataset")
        .def_property_readonly("feature_names",
                               [](const FeatureDataset& d) {
                                   std::vector<std::string> names(d.schema->size());
                                   for (std::size_t j = 0; j < d.schema->size(); ++j) {
                                       names[j] = d.schema->feature_name(j);
                                   }
                                   return names;
                               })
        .def_property_readonly("matrix",
                               [](const FeatureDataset& d) { return matrix_to_rows(d.x); })
        .def_readonly("labels", &FeatureDataset::labels)
        .def_readonly("event_ids", &FeatureDataset::event_ids)
        .def_readonly("cadence_s", &FeatureDataset::cadence_s);

    m.def(
        "extract_dataset",
        [](const std::vector<LabeledInstance>& instances, const ExtractionConfig& config) {
            return extract_dataset(instances, config);
        },
        py::arg("instances"), py::arg("config") = ExtractionConfig{});

    // forest
    py::class_<ForestHyperparams>(m, "ForestHyperparams")
        .def(py::init<>())
        .def_readwrite("n_trees", &ForestHyperparams::n_trees)
        .def_readwrite("max_features", &ForestHyperparams::max_features)
        .def_readwrite("min_samples_leaf", &ForestHyperparams::min_samples_leaf)
        .def_readwrite("max_depth", &ForestHyperparams::max_depth)
        .def_readwrite("seed", &ForestHyperparams::seed);

    py::class_<Forest>(m, "Forest")
        .def_property_readonly("n_features", [](const Forest& f) { return f.n_features; })
        .def_property_readonly("n_trees", [](const Forest& f) { return f.trees.size(); })
        .def("predict_proba",
             [](const Forest& f, const std::vector<double>& row) { return predict_proba(f, row); })
        .def("predict",
             [](const Forest& f, const std::vector<double>& row) { return predict(f, row); })
        .def("mdi_importance", [](const Forest& f) { return mdi_importance(f).values; })
        .def("to_json", [](const Forest& f) { return forest_to_json(f).dump(2); });

    m.def(
        "gini",
        [](const std::vector<std::size_t>& counts) { return gini(GiniContext{counts}); },
        py::arg("class_counts"));
    m.def(
        "fit_forest",
        [](const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
           const ForestHyperparams& hp, int threads) {
            return fit_forest(DataMatrix::from_rows(rows), labels, hp, threads);
        },
        py::arg("rows"), py::arg("labels"), py::arg("hp") = ForestHyperparams{},
        py::arg("threads") = 1);
    m.def("forest_from_json",
          [](const std::string& text) { return forest_from_json(nlohmann::json::parse(text)); });

    // metrics
    py::class_<ContingencyTable>(m, "ContingencyTable")
        .def(py::init<>())
        .def(py::init([](std::int64_t tp, std::int64_t fp, std::int64_t fn, std::int64_t tn) {
                 return ContingencyTable{tp, fp, fn, tn};
             }),
             py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"))
        .def_readwrite("tp", &ContingencyTable::tp)
        .def_readwrite("fp", &ContingencyTable::fp)
        .def_readwrite("fn", &ContingencyTable::fn)
        .def_readwrite("tn", &ContingencyTable::tn);

    m.def("contingency",
          [](const std::vector<int>& pred, const std::vector<int>& truth) {
              return contingency(pred, truth);
          });
    m.def("tss", [](const ContingencyTable& t) { return opt_to_py(tss(t)); });
    m.def("hss", [](const ContingencyTable& t) { return opt_to_py(hss(t)); });
    m.def("css", [](const ContingencyTable& t) { return opt_to_py(css(t)); });
    m.def("gss", [](const ContingencyTable& t) { return opt_to_py(gss(t)); });
    m.def("skill_report",
          [](const ContingencyTable& t) { return skill_report_to_dict(SkillReport::from(t)); });

    // explainability
    m.def(
        "bootstrap_importances",
        [](const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
           const ForestHyperparams& hp, std::size_t b, std::uint64_t seed, int threads) {
            const auto records =
                bootstrap_importances(DataMatrix::from_rows(rows), labels, hp, b, seed, threads);
            std::vector<std::vector<double>> out;
            out.reserve(records.size());
            for (const auto& record : records) out.push_back(record.importance.values);
            return out;
        },
        py::arg("rows"), py::arg("labels"), py::arg("hp") = ForestHyperparams{},
        py::arg("iterations") = 100, py::arg("seed") = 0, py::arg("threads") = 1,
        "Returns the per-iteration normalized importance vectors");

    // synthetic + experiment harness
    py::class_<SyntheticSpec>(m, "SyntheticSpec")
        .def(py::init<>())
        .def_readwrite("n_strong", &SyntheticSpec::n_strong)
        .def_readwrite("n_weak", &SyntheticSpec::n_weak)
        .def_readwrite("n_noevent", &SyntheticSpec::n_noevent)
        .def_readwrite("channels", &SyntheticSpec::channels)
        .def_readwrite("background_pfu", &SyntheticSpec::background_pfu)
        .def_readwrite("noise_decades", &SyntheticSpec::noise_decades)
        .def_readwrite("amplitudes", &SyntheticSpec::amplitudes)
        .def_readwrite("weak_amplitude_scale", &SyntheticSpec::weak_amplitude_scale)
        .def_readwrite("lag_decay_per_min", &SyntheticSpec::lag_decay_per_min)
        .def_readwrite("cadence_s", &SyntheticSpec::cadence_s)
        .def_readwrite("slice_hours", &SyntheticSpec::slice_hours)
        .def_readwrite("seed", &SyntheticSpec::seed);

    m.def("generate_events", &generate_events, py::arg("spec"));
    m.def("write_synthetic_dataset", &write_synthetic_dataset, py::arg("spec"), py::arg("out_dir"));

    m.def(
        "run_grid_json",
        [](const std::string& config_json) {
            const ExperimentConfig config = config_from_json(nlohmann::json::parse(config_json));
            return report_to_json(run_grid(config)).dump(2);
        },
        py::arg("config_json"), "Runs the experiment grid; takes and returns JSON strings");
    m.def(
        "run_explain_channel_shares",
        [](const std::string& config_json, std::size_t iterations) {
            const ExperimentConfig config = config_from_json(nlohmann::json::parse(config_json));
            const auto results = run_explain(config, {iterations}, std::nullopt);
            py::dict shares;
            const auto& profile = results.front().profile;
            for (std::size_t ch = 0; ch < profile.channels.size(); ++ch) {
                shares[py::str(profile.channels[ch])] = profile.channel_share(ch);
            }
            return shares;
        },
        py::arg("config_json"), py::arg("iterations") = 100,
        "Runs the bootstrap explainability pass; returns per-channel importance shares");
}
