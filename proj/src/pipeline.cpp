#include "flowagg/pipeline.hpp"

#include <functional>
#include <map>
#include <sstream>

#include "flowagg/errors.hpp"
#include "flowagg/ini.hpp"
#include "flowagg/random.hpp"
#include "text_util.hpp"

namespace flowagg {

namespace {

using Setter = std::function<void(PipelineConfig&, std::string_view, const std::string&)>;

std::size_t to_count(std::string_view v, const std::string& where) {
    const long long n = detail::parse_int(v, where);
    if (n < 0) throw ValidationError(where + ": expected a non-negative integer");
    return static_cast<std::size_t>(n);
}

std::optional<double> to_optional_seconds(std::string_view v, const std::string& where) {
    if (detail::trim(v) == "none") return std::nullopt;
    return detail::parse_double(v, where);
}

std::vector<double> to_doubles(std::string_view v, const std::string& where) {
    std::vector<double> out;
    for (const auto& part : detail::split(v, ',')) out.push_back(detail::parse_double(part, where));
    return out;
}

std::vector<std::size_t> to_counts(std::string_view v, const std::string& where) {
    std::vector<std::size_t> out;
    for (const auto& part : detail::split(v, ',')) out.push_back(to_count(part, where));
    return out;
}

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"seed", [](auto& c, auto v, auto& w) { c.seed = to_count(v, w); }},
        {"flow.idle_timeout_s", [](auto& c, auto v, auto& w) { c.flow.idle_timeout_s = detail::parse_double(v, w); }},
        {"flow.active_timeout_s", [](auto& c, auto v, auto& w) { c.flow.active_timeout_s = to_optional_seconds(v, w); }},
        {"aggregation.window_s", [](auto& c, auto v, auto& w) { c.window = to_optional_seconds(v, w); }},
        {"rfe.k", [](auto& c, auto v, auto& w) { c.rfe.k = to_count(v, w); }},
        {"rfe.step", [](auto& c, auto v, auto& w) { c.rfe.step = to_count(v, w); }},
        {"rfe.hidden", [](auto& c, auto v, auto& w) { c.rfe.inner.hidden_layers = to_counts(v, w); }},
        {"rfe.learning_rate", [](auto& c, auto v, auto& w) { c.rfe.inner.training.learning_rate = detail::parse_double(v, w); }},
        {"rfe.epochs", [](auto& c, auto v, auto& w) { c.rfe.inner.training.epochs = static_cast<int>(to_count(v, w)); }},
        {"rfe.batch_size", [](auto& c, auto v, auto& w) { c.rfe.inner.training.batch_size = to_count(v, w); }},
        {"model.hidden", [](auto& c, auto v, auto& w) { c.model.hidden_layers = to_counts(v, w); }},
        {"model.hidden_activation", [](auto& c, auto v, auto&) {
             c.model.hidden_activation = parse_activation(detail::trim(v));
             c.rfe.inner.hidden_activation = c.model.hidden_activation;
         }},
        {"model.learning_rate", [](auto& c, auto v, auto& w) { c.model.training.learning_rate = detail::parse_double(v, w); }},
        {"model.epochs", [](auto& c, auto v, auto& w) { c.model.training.epochs = static_cast<int>(to_count(v, w)); }},
        {"model.batch_size", [](auto& c, auto v, auto& w) { c.model.training.batch_size = to_count(v, w); }},
        {"eval.folds", [](auto& c, auto v, auto& w) { c.folds = to_count(v, w); }},
        {"zeroday.thresholds", [](auto& c, auto v, auto& w) { c.thresholds.thresholds = to_doubles(v, w); }},
        {"zeroday.hidden", [](auto& c, auto v, auto& w) {
             const auto t = detail::trim(v);
             if (t == "auto") c.autoencoder.hidden.reset();
             else c.autoencoder.hidden = to_count(t, w);
         }},
        {"zeroday.learning_rate", [](auto& c, auto v, auto& w) { c.autoencoder.training.learning_rate = detail::parse_double(v, w); }},
        {"zeroday.epochs", [](auto& c, auto v, auto& w) { c.autoencoder.training.epochs = static_cast<int>(to_count(v, w)); }},
        {"zeroday.batch_size", [](auto& c, auto v, auto& w) { c.autoencoder.training.batch_size = to_count(v, w); }},
        {"synth.benign_flows", [](auto& c, auto v, auto& w) { c.scale.benign_flows = to_count(v, w); }},
        {"synth.attack_flows", [](auto& c, auto v, auto& w) { c.scale.attack_flows = to_count(v, w); }},
    };
    return table;
}

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json("none");
}

}  // namespace

PipelineConfig::PipelineConfig() {
    // Mini-batch keeps the seed-swept studies inside a single-core budget;
    // full-batch 0.05 x 500 remains available through the config keys.
    model.training.learning_rate = 0.1;
    model.training.epochs = 50;
    model.training.batch_size = 32;
    rfe.inner = model;
}

void PipelineConfig::set(std::string_view key, std::string_view value, const std::string& where) {
    const auto it = setters().find(key);
    if (it == setters().end())
        throw ValidationError(where + ": unknown config key '" + std::string(key) + "'");
    it->second(*this, value, where + " (" + std::string(key) + ")");
}

void PipelineConfig::load_file(const std::filesystem::path& path) {
    for (const auto& e : load_ini(path))
        set(e.full_key(), e.value, path.string() + ":" + std::to_string(e.line));
}

void PipelineConfig::validate() const {
    flow.validate();
    if (window && !(*window > 0.0)) throw ValidationError("aggregation.window_s must be > 0 or none");
    if (rfe.k < 1 || rfe.step < 1) throw ValidationError("rfe.k and rfe.step must be >= 1");
    if (folds < 2) throw ValidationError("eval.folds must be >= 2");
    model.training.validate();
    rfe.inner.training.validate();
    autoencoder.training.validate();
    thresholds.validate();
    for (auto h : model.hidden_layers)
        if (h == 0) throw ValidationError("model.hidden sizes must be >= 1");
    for (auto h : rfe.inner.hidden_layers)
        if (h == 0) throw ValidationError("rfe.hidden sizes must be >= 1");
    if (autoencoder.hidden && *autoencoder.hidden == 0) throw ValidationError("zeroday.hidden must be >= 1");
}

std::vector<std::string> PipelineConfig::keys() {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
}

nlohmann::json PipelineConfig::to_json() const {
    return {
        {"seed", seed},
        {"flow.idle_timeout_s", flow.idle_timeout_s},
        {"flow.active_timeout_s", optional_json(flow.active_timeout_s)},
        {"aggregation.window_s", optional_json(window)},
        {"rfe.k", rfe.k},
        {"rfe.step", rfe.step},
        {"rfe.hidden", rfe.inner.hidden_layers},
        {"rfe.learning_rate", rfe.inner.training.learning_rate},
        {"rfe.epochs", rfe.inner.training.epochs},
        {"rfe.batch_size", rfe.inner.training.batch_size},
        {"model.hidden", model.hidden_layers},
        {"model.hidden_activation", to_string(model.hidden_activation)},
        {"model.learning_rate", model.training.learning_rate},
        {"model.epochs", model.training.epochs},
        {"model.batch_size", model.training.batch_size},
        {"eval.folds", folds},
        {"zeroday.thresholds", thresholds.thresholds},
        {"zeroday.hidden", autoencoder.hidden ? nlohmann::json(*autoencoder.hidden) : nlohmann::json("auto")},
        {"zeroday.learning_rate", autoencoder.training.learning_rate},
        {"zeroday.epochs", autoencoder.training.epochs},
        {"zeroday.batch_size", autoencoder.training.batch_size},
        {"synth.benign_flows", scale.benign_flows},
        {"synth.attack_flows", scale.attack_flows},
    };
}

FlowTable flows_from_packets(std::span<const PacketRecord> packets, const PipelineConfig& cfg,
                             std::span<const LabelEntry> manifest) {
    FlowTable table;
    const auto flows = assemble_flows(packets, cfg.flow);
    table.rows = extract_all(flows);
    if (!manifest.empty()) table.unlabeled = apply_labels(table.rows, manifest);
    table.rows = aggregate(std::move(table.rows), cfg.window);
    return table;
}

std::vector<std::pair<std::string, std::vector<FlowFeatureVector>>> split_by_label(
    std::span<const FlowFeatureVector> rows) {
    std::vector<std::pair<std::string, std::vector<FlowFeatureVector>>> groups;
    std::map<std::string, std::size_t> index;
    for (const auto& r : rows) {
        auto [it, inserted] = index.try_emplace(r.label, groups.size());
        if (inserted) groups.emplace_back(r.label, std::vector<FlowFeatureVector>{});
        groups[it->second].second.push_back(r);
    }
    return groups;
}

ZeroDayStudy zero_day_study(std::span<const FlowFeatureVector> benign,
                            const std::vector<std::pair<std::string, std::vector<FlowFeatureVector>>>& attacks,
                            bool with_aggregation, const PipelineConfig& cfg) {
    if (benign.size() < 2) throw ValidationError("zero-day study needs at least two benign rows");
    std::vector<std::size_t> order(benign.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(cfg.seed ^ 0x2eb0d4a1ULL);
    rng.shuffle(order);
    const std::size_t train_count = std::max<std::size_t>(1, benign.size() * 4 / 5);

    std::vector<FlowFeatureVector> train_rows, validation_rows;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < train_count ? train_rows : validation_rows).push_back(benign[order[i]]);

    AutoencoderSpec spec = cfg.autoencoder;
    spec.training.seed = cfg.seed;
    const ZeroDayModel model = fit_benign(build_dataset(train_rows, with_aggregation), spec);

    auto evaluate = [&](const std::vector<FlowFeatureVector>& rows, SampleKind kind) {
        Dataset d = build_dataset(rows, with_aggregation);
        return detect(model, d, cfg.thresholds, kind);
    };
    ZeroDayStudy study;
    study.benign_validation = evaluate(validation_rows, SampleKind::Benign);
    for (const auto& [name, rows] : attacks) study.attacks.emplace_back(name, evaluate(rows, SampleKind::Attack));
    return study;
}

namespace {

nlohmann::json study_json(const ZeroDayStudy& s) {
    nlohmann::json attacks = nlohmann::json::object();
    for (const auto& [name, r] : s.attacks) attacks[name] = to_json(r);
    return {{"benign_validation", to_json(s.benign_validation)}, {"attacks", attacks}};
}

std::string format_study(const ZeroDayStudy& s, const ThresholdPolicy& policy, bool with_aggregation) {
    std::ostringstream out;
    char buf[128];
    out << "zero-day detection accuracy (" << (with_aggregation ? "with" : "without")
        << " aggregation features)\n  " ;
    std::snprintf(buf, sizeof buf, "%-22s", "threshold");
    out << buf;
    for (double t : policy.thresholds) {
        std::snprintf(buf, sizeof buf, "%10.2f", t);
        out << buf;
    }
    out << '\n';
    auto row = [&](const std::string& name, const DetectionReport& r) {
        std::snprintf(buf, sizeof buf, "  %-22s", name.c_str());
        out << buf;
        for (const auto& o : r.outcomes) {
            std::snprintf(buf, sizeof buf, "%9.2f%%", 100.0 * o.accuracy);
            out << buf;
        }
        out << '\n';
    };
    row("benign (validation)", s.benign_validation);
    for (const auto& [name, r] : s.attacks) row(name, r);
    return out.str();
}

}  // namespace

ReplicationResult replicate(const PipelineConfig& cfg, const std::optional<std::filesystem::path>& artifacts) {
    cfg.validate();
    const ScenarioSpec spec = builtin_scenario("five_class", cfg.seed, cfg.scale);
    const SyntheticCapture capture = generate(spec);
    const FlowTable table = flows_from_packets(capture.packets, cfg, capture.manifest);
    if (table.unlabeled != 0)
        throw ValidationError(std::to_string(table.unlabeled) + " generated flows have no label");

    if (artifacts) {
        std::filesystem::create_directories(*artifacts);
        write_pcap(capture.packets, *artifacts / "scenario.pcap");
        write_label_manifest(*artifacts / "labels.csv", capture.manifest);
        write_flow_csv(*artifacts / "flows.csv", table.rows);
    }

    auto groups = split_by_label(table.rows);
    std::vector<FlowFeatureVector> benign;
    std::map<std::string, std::vector<FlowFeatureVector>> attack_rows;
    std::vector<std::pair<std::string, std::vector<FlowFeatureVector>>> attacks;
    for (auto& [name, rows] : groups) {
        if (name == kBenignLabel) {
            benign = rows;
        } else {
            attack_rows[name] = rows;
            attacks.emplace_back(name, rows);
        }
    }

    struct Run {
        Design design;
        std::vector<std::string> attacks;
        bool extended;
    };
    std::vector<Run> runs;
    for (const auto& a : {"slowloris", "slowhttptest", "portscan", "hulk"}) runs.push_back({Design::Binary, {a}, false});
    for (const auto& a : {"slowloris", "slowhttptest", "hulk"})
        runs.push_back({Design::ThreeClass, {std::string(kPortScanLabel), a}, false});
    runs.push_back({Design::FiveClass, {"portscan", "hulk", "slowloris", "slowhttptest"}, false});
    runs.push_back({Design::FiveClass, {"portscan", "hulk", "slowloris", "slowhttptest"}, true});

    nlohmann::json experiments = nlohmann::json::array();
    nlohmann::json lift = nlohmann::json::array();
    std::ostringstream text;
    text << "flowagg desk-scale replication (seed " << cfg.seed << ")\n";
    text << "flows:";
    for (const auto& [name, rows] : groups) text << ' ' << name << '=' << rows.size();
    text << "\n\n";

    for (const auto& run : runs) {
        ExperimentInputs inputs;
        inputs.benign = benign;
        for (const auto& a : run.attacks) inputs.attacks.emplace_back(a, attack_rows.at(a));
        ExperimentConfig ec;
        ec.design = run.design;
        ec.extended = run.extended;
        ec.folds = cfg.folds;
        ec.rfe = cfg.rfe;
        ec.model = cfg.model;
        ec.seed = cfg.seed;

        ExperimentReport reports[2];
        for (int with = 0; with < 2; ++with) {
            ec.with_aggregation = with == 1;
            reports[with] = run_experiment(inputs, ec);
            nlohmann::json j = to_json(reports[with]);
            j["extended"] = run.extended;
            experiments.push_back(j);
            text << format_report(reports[with]) << '\n';
        }
        for (const auto& c : reports[0].classes) {
            if (c.name == kBenignLabel) continue;
            char buf[160];
            const double before = c.recall.mean;
            const double after = reports[1].cls(c.name).recall.mean;
            std::snprintf(buf, sizeof buf, "  recall %-14s %7.2f%% -> %7.2f%%\n", c.name.c_str(),
                          100.0 * before, 100.0 * after);
            text << buf;
            lift.push_back({{"design", reports[0].design},
                            {"extended", run.extended},
                            {"class", c.name},
                            {"recall_without", before},
                            {"recall_with", after}});
        }
        text << '\n';
    }

    const ZeroDayStudy without = zero_day_study(benign, attacks, false, cfg);
    const ZeroDayStudy with = zero_day_study(benign, attacks, true, cfg);
    text << format_study(without, cfg.thresholds, false) << '\n'
         << format_study(with, cfg.thresholds, true);

    nlohmann::json flow_counts = nlohmann::json::object();
    for (const auto& [name, rows] : groups) flow_counts[name] = rows.size();

    ReplicationResult result;
    result.report = {
        {"format", "flowagg.replication"},
        {"version", 1},
        {"seed", cfg.seed},
        {"config", cfg.to_json()},
        {"packets", capture.packets.size()},
        {"flows", flow_counts},
        {"experiments", experiments},
        {"recall_lift", lift},
        {"zero_day", {{"without_aggregation", study_json(without)}, {"with_aggregation", study_json(with)}}},
    };
    result.text = text.str();
    return result;
}

}  // namespace flowagg
