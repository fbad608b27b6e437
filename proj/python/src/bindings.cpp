#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowagg/classifier.hpp"
#include "flowagg/dataset.hpp"
#include "flowagg/errors.hpp"
#include "flowagg/feature_selection.hpp"
#include "flowagg/flow_aggregation.hpp"
#include "flowagg/flow_assembly.hpp"
#include "flowagg/flow_features.hpp"
#include "flowagg/packet_capture.hpp"
#include "flowagg/pipeline.hpp"
#include "flowagg/synth_traffic.hpp"
#include "flowagg/zero_day.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace flowagg;

namespace {

using Overrides = std::optional<py::dict>;

// Defaults, then each "section.key" override, as the CLI's --set does.
PipelineConfig resolve(const Overrides& overrides) {
    PipelineConfig cfg;
    if (overrides) {
        for (const auto& [k, v] : *overrides) {
            const auto key = py::str(k).cast<std::string>();
            std::string value;
            if (py::isinstance<py::bool_>(v)) value = v.cast<bool>() ? "true" : "false";
            else if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
                for (const auto& item : v) value += (value.empty() ? "" : ",") + py::str(item).cast<std::string>();
            } else if (v.is_none()) value = "none";
            else value = py::str(v).cast<std::string>();
            cfg.set(key, value, "overrides");
        }
    }
    cfg.validate();
    return cfg;
}

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

struct FlowRows {
    std::vector<FlowFeatureVector> rows;

    bool aggregated() const {
        for (const auto& r : rows)
            if (!r.aggregated()) return false;
        return !rows.empty();
    }

    Dataset dataset(bool with_aggregation, std::vector<std::string> class_names = {}) const {
        if (rows.empty()) throw ValidationError("flow table is empty");
        if (with_aggregation && !aggregated())
            throw ValidationError("flow table has rows without aggregation features; call aggregate() first");
        return build_dataset(rows, with_aggregation, std::move(class_names));
    }

    // 36 columns; absent aggregation values are NaN.
    Eigen::MatrixXd features() const {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kFlowFeatureCount + 2));
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            for (std::size_t c = 0; c < kFlowFeatureCount; ++c) m(r, static_cast<Eigen::Index>(c)) = rows[i].values[c];
            m(r, kFlowFeatureCount) = rows[i].num_flows.value_or(nan);
            m(r, kFlowFeatureCount + 1) = rows[i].src_ports_delta.value_or(nan);
        }
        return m;
    }
};

std::vector<std::string> columns() {
    const auto& names = flow_feature_names();
    std::vector<std::string> out(names.begin(), names.end());
    for (const auto& a : aggregation_columns()) out.push_back(a);
    return out;
}

bool needs_aggregation(const std::vector<std::string>& features) {
    for (const auto& a : aggregation_columns())
        for (const auto& f : features)
            if (f == a) return true;
    return false;
}

SampleKind parse_kind(const std::string& kind) {
    if (kind == "attack") return SampleKind::Attack;
    if (kind == "benign") return SampleKind::Benign;
    throw ValidationError("kind must be 'attack' or 'benign', got '" + kind + "'");
}

}  // namespace

PYBIND11_MODULE(_flowagg, m) {
    m.doc() = "Flow extraction, flow aggregation features and ANN-based intrusion detection";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

    m.def("ports_delta", [](const std::vector<std::uint16_t>& ports) { return ports_delta(ports); }, py::arg("ports"),
          "Mean absolute difference between consecutive sorted source ports.");
    m.def("feature_columns", &columns, "The 34 flow features followed by num_flows and src_ports_delta.");
    m.def("builtin_scenarios", &builtin_scenarios);
    m.def("resolve_config", [](const Overrides& o) { return to_python(resolve(o).to_json()); },
          py::arg("overrides") = py::none(), "Resolved configuration as a dict of section.key entries.");

    py::class_<FlowRows>(m, "FlowTable")
        .def_static(
            "from_pcap",
            [](const fs::path& pcap, const std::optional<fs::path>& labels, const Overrides& o) {
                const PipelineConfig cfg = resolve(o);
                const CaptureReadResult capture = read_pcap(pcap);
                FlowRows t{extract_all(assemble_flows(capture.packets, cfg.flow))};
                if (labels) apply_labels(t.rows, read_label_manifest(*labels));
                return t;
            },
            py::arg("pcap"), py::arg("labels") = py::none(), py::arg("config") = py::none(),
            "Reassemble flows from a capture; rows are not aggregated.")
        .def_static("from_csv", [](const fs::path& p) { return FlowRows{read_flow_csv(p)}; }, py::arg("path"))
        .def("to_csv", [](const FlowRows& t, const fs::path& p) { write_flow_csv(p, t.rows); }, py::arg("path"))
        .def(
            "aggregate",
            [](const FlowRows& t, std::optional<double> window) { return FlowRows{aggregate(t.rows, window)}; },
            py::arg("window") = py::none(), "Copy with num_flows and src_ports_delta set on every row.")
        .def(
            "with_label",
            [](const FlowRows& t, const std::string& label) {
                FlowRows out = t;
                for (auto& r : out.rows) r.label = label;
                return out;
            },
            py::arg("label"))
        .def(
            "split_by_label",
            [](const FlowRows& t) {
                py::dict out;
                for (auto& [name, rows] : split_by_label(t.rows)) out[py::str(name)] = FlowRows{std::move(rows)};
                return out;
            })
        .def_property_readonly("features", &FlowRows::features)
        .def_property_readonly("columns", [](const FlowRows&) { return columns(); })
        .def_property_readonly("labels",
                               [](const FlowRows& t) {
                                   std::vector<std::string> out;
                                   for (const auto& r : t.rows) out.push_back(r.label);
                                   return out;
                               })
        .def_property_readonly("start_times",
                               [](const FlowRows& t) {
                                   std::vector<double> out;
                                   for (const auto& r : t.rows) out.push_back(r.start_time);
                                   return out;
                               })
        .def_property_readonly("initiators",
                               [](const FlowRows& t) {
                                   std::vector<std::string> out;
                                   for (const auto& r : t.rows)
                                       out.push_back(r.initiator.ip.to_string() + ":" +
                                                     std::to_string(r.initiator.port));
                                   return out;
                               })
        .def_property_readonly("aggregated", &FlowRows::aggregated)
        .def("__len__", [](const FlowRows& t) { return t.rows.size(); });

    m.def(
        "synthesize",
        [](const std::string& scenario, const fs::path& pcap, const std::optional<fs::path>& labels,
           const Overrides& o) {
            const PipelineConfig cfg = resolve(o);
            const ScenarioSpec spec =
                fs::exists(scenario) ? load_scenario_file(scenario) : builtin_scenario(scenario, cfg.seed, cfg.scale);
            const SyntheticCapture cap = generate(spec);
            write_pcap(cap.packets, pcap);
            if (labels) write_label_manifest(*labels, cap.manifest);
            py::dict out;
            out["packets"] = cap.packets.size();
            out["flows"] = cap.manifest.size();
            return out;
        },
        py::arg("scenario"), py::arg("pcap"), py::arg("labels") = py::none(), py::arg("config") = py::none(),
        "Write a synthetic capture (and its label manifest) for a builtin scenario or scenario file.");

    m.def(
        "rfe_select",
        [](const FlowRows& t, bool with_aggregation, const Overrides& o) {
            const PipelineConfig cfg = resolve(o);
            RfeConfig rc = cfg.rfe;
            rc.seed = cfg.seed;
            const RfeResult r = rfe_select(t.dataset(with_aggregation), rc);
            py::dict out;
            out["selected"] = r.selected;
            out["eliminated"] = r.eliminated;
            return out;
        },
        py::arg("table"), py::arg("with_aggregation") = true, py::arg("config") = py::none(),
        "Recursive feature elimination down to rfe.k features.");

    py::class_<Classifier>(m, "Classifier")
        .def_static(
            "fit",
            [](const FlowRows& t, const std::optional<std::vector<std::string>>& features, bool with_aggregation,
               const Overrides& o) {
                const PipelineConfig cfg = resolve(o);
                const bool agg = with_aggregation || (features && needs_aggregation(*features));
                Dataset d = t.dataset(agg);
                if (features) d = d.select_columns(*features);
                return fit_classifier(d, cfg.model, cfg.seed);
            },
            py::arg("table"), py::arg("features") = py::none(), py::arg("with_aggregation") = true,
            py::arg("config") = py::none())
        .def(
            "predict",
            [](const Classifier& c, const FlowRows& t) {
                const Dataset d = t.dataset(needs_aggregation(c.feature_names));
                std::vector<std::string> out;
                for (int k : c.predict(d)) out.push_back(c.class_names[static_cast<std::size_t>(k)]);
                return out;
            },
            py::arg("table"), "Predicted class name per row.")
        .def(
            "predict_matrix", [](const Classifier& c, const Eigen::MatrixXd& x) { return c.predict(x); },
            py::arg("features"), "Class indices for a matrix in feature_names column order.")
        .def_readonly("feature_names", &Classifier::feature_names)
        .def_readonly("class_names", &Classifier::class_names)
        .def("save", [](const Classifier& c, const fs::path& p) { save_classifier(c, p); }, py::arg("path"))
        .def_static("load", [](const fs::path& p) { return load_classifier(p); }, py::arg("path"));

    m.def(
        "run_experiment",
        [](const std::string& design, const FlowRows& benign, const std::map<std::string, FlowRows>& attacks,
           bool with_aggregation, bool extended, const Overrides& o) {
            const PipelineConfig cfg = resolve(o);
            ExperimentInputs inputs;
            inputs.benign = benign.rows;
            for (auto& r : inputs.benign) r.label = std::string(kBenignLabel);
            for (const auto& [name, table] : attacks) {
                auto rows = table.rows;
                for (auto& r : rows) r.label = name;
                inputs.attacks.emplace_back(name, std::move(rows));
            }
            ExperimentConfig ec;
            ec.design = parse_design(design);
            ec.with_aggregation = with_aggregation;
            ec.extended = extended;
            ec.folds = cfg.folds;
            ec.rfe = cfg.rfe;
            ec.model = cfg.model;
            ec.seed = cfg.seed;
            return to_python(to_json(run_experiment(inputs, ec)));
        },
        py::arg("design"), py::arg("benign"), py::arg("attacks"), py::arg("with_aggregation") = false,
        py::arg("extended") = false, py::arg("config") = py::none(),
        "RFE then stratified k-fold evaluation; returns per-class precision, recall and F1.");

    py::class_<ZeroDayModel>(m, "ZeroDayDetector")
        .def_static(
            "fit",
            [](const FlowRows& benign, bool with_aggregation, const Overrides& o) {
                const PipelineConfig cfg = resolve(o);
                AutoencoderSpec spec = cfg.autoencoder;
                spec.training.seed = cfg.seed;
                return fit_benign(benign.dataset(with_aggregation), spec);
            },
            py::arg("benign"), py::arg("with_aggregation") = true, py::arg("config") = py::none())
        .def(
            "errors",
            [](const ZeroDayModel& z, const FlowRows& t) {
                return Eigen::VectorXd(z.errors(t.dataset(needs_aggregation(z.feature_names))));
            },
            py::arg("table"), "Reconstruction error per row.")
        .def(
            "detect",
            [](const ZeroDayModel& z, const FlowRows& t, const std::string& kind,
               const std::optional<std::vector<double>>& thresholds) {
                ThresholdPolicy policy;
                if (thresholds) policy.thresholds = *thresholds;
                policy.validate();
                const Dataset d = t.dataset(needs_aggregation(z.feature_names));
                return to_python(to_json(detect(z, d, policy, parse_kind(kind))));
            },
            py::arg("table"), py::arg("kind") = "attack", py::arg("thresholds") = py::none())
        .def_readonly("feature_names", &ZeroDayModel::feature_names)
        .def("save", [](const ZeroDayModel& z, const fs::path& p) { save_zero_day(z, p); }, py::arg("path"))
        .def_static("load", [](const fs::path& p) { return load_zero_day(p); }, py::arg("path"));

    m.def(
        "replicate",
        [](const Overrides& o) {
            const ReplicationResult r = replicate(resolve(o));
            py::dict out;
            out["report"] = to_python(r.report);
            out["text"] = r.text;
            return out;
        },
        py::arg("config") = py::none(), "Run the full synthetic study; returns the JSON report and its text form.");
}
