// flowagg command-line entry point.
//
// Settings resolve as: built-in defaults, then --config FILE, then flags on
// the command line (including --set key=value). Exit status: 0 success,
// 1 invalid input or configuration, 2 file I/O failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowagg/errors.hpp"
#include "flowagg/pipeline.hpp"

namespace fs = std::filesystem;
using namespace flowagg;

namespace {

// Flag values that map onto config keys; applied after the config file.
struct Overrides {
    std::vector<std::pair<std::string, CLI::Option*>> bound;
    std::map<std::string, std::string> values;

    void bind(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        auto* opt = app->add_option(flag, values[key], help + " [" + key + "]");
        bound.emplace_back(key, opt);
    }
    void apply(PipelineConfig& cfg) const {
        for (const auto& [key, opt] : bound)
            if (opt->count() > 0) cfg.set(key, values.at(key), "command line");
    }
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("error writing '" + path.string() + "'");
}

void write_json(const fs::path& path, const nlohmann::json& doc) { write_text(path, doc.dump(2) + "\n"); }

bool all_aggregated(const std::vector<FlowFeatureVector>& rows) {
    for (const auto& r : rows)
        if (!r.num_flows || !r.src_ports_delta) return false;
    return true;
}

Dataset load_dataset(const fs::path& csv, bool with_aggregation) {
    const auto rows = read_flow_csv(csv);
    if (rows.empty()) throw ValidationError("'" + csv.string() + "' has no flow rows");
    if (with_aggregation && !all_aggregated(rows))
        throw ValidationError("'" + csv.string() +
                              "' has rows without aggregation features; run `flowagg aggregate` first "
                              "or pass --exclude-aggregation");
    return build_dataset(rows, with_aggregation);
}

bool needs_aggregation(const std::vector<std::string>& features) {
    for (const auto& a : aggregation_columns())
        for (const auto& f : features)
            if (f == a) return true;
    return false;
}

// Single-pass scoring of a saved classifier, reported in the k-fold layout
// with one "fold" and zero spread.
ExperimentReport score_classifier(const Classifier& c, const fs::path& csv) {
    const bool agg = needs_aggregation(c.feature_names);
    auto rows = read_flow_csv(csv);
    if (agg && !all_aggregated(rows))
        throw ValidationError("model uses aggregation features but '" + csv.string() + "' is not aggregated");
    const Dataset d = build_dataset(rows, agg, c.class_names);
    const auto predicted = c.predict(d);
    const auto counts = ConfusionCounts::from_predictions(d.labels, predicted, c.class_names.size());
    ExperimentReport r;
    r.design = "holdout";
    r.with_aggregation = agg;
    r.folds = 1;
    r.hidden_neurons = c.model.layer_sizes.size() > 2 ? c.model.layer_sizes[1] : 0;
    r.selected_features = c.feature_names;
    for (std::size_t k = 0; k < c.class_names.size(); ++k)
        r.classes.push_back({c.class_names[k],
                             {precision(counts, k).value, 0.0},
                             {recall(counts, k).value, 0.0},
                             {f1(counts, k).value, 0.0}});
    return r;
}

void print_detection(const std::string& title, const DetectionReport& r) {
    std::printf("%s (%s samples)\n", title.c_str(), r.kind == SampleKind::Benign ? "benign" : "attack");
    std::printf("  %-10s %10s %10s %10s\n", "threshold", "flagged", "total", "accuracy");
    for (const auto& o : r.outcomes)
        std::printf("  %-10.4g %10zu %10zu %9.2f%%\n", o.threshold, o.flagged, o.total, 100.0 * o.accuracy);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flowagg: flow aggregation features for intrusion detection"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", "flowagg 0.1.0");

    std::string config_path;
    std::vector<std::string> sets;
    bool show_config = false;
    Overrides ov;
    app.add_option("--config", config_path, "Config file (flat key = value sections)");
    app.add_option("--set", sets, "Override one config key, e.g. --set model.epochs=200")->take_all();
    app.add_flag("--show-config", show_config, "Print the resolved config as JSON and exit");
    ov.bind(&app, "--seed", "seed", "Random seed");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic capture");
    std::string scenario = "mimicking", pcap_out, labels_out;
    synth->add_option("--scenario", scenario, "Built-in scenario name or scenario config file")
        ->capture_default_str();
    synth->add_option("--out", pcap_out, "Output pcap")->required();
    synth->add_option("--labels", labels_out, "Output label manifest CSV");
    ov.bind(synth, "--benign-flows", "synth.benign_flows", "Benign flows in built-in scenarios");
    ov.bind(synth, "--attack-flows", "synth.attack_flows", "Flows per attack class in built-in scenarios");

    // extract
    auto* extract = app.add_subcommand("extract", "Assemble flows from a pcap and write per-flow features");
    std::string pcap_in, csv_out, labels_in;
    extract->add_option("--pcap", pcap_in, "Input pcap")->required();
    extract->add_option("--out", csv_out, "Output flow CSV")->required();
    extract->add_option("--labels", labels_in, "Label manifest to apply");
    ov.bind(extract, "--idle-timeout", "flow.idle_timeout_s", "Idle timeout in seconds");
    ov.bind(extract, "--active-timeout", "flow.active_timeout_s", "Active timeout in seconds or 'none'");

    // aggregate
    auto* aggregate_cmd = app.add_subcommand("aggregate", "Fill num_flows and src_ports_delta per flow");
    std::string csv_in;
    aggregate_cmd->add_option("--in", csv_in, "Input flow CSV")->required();
    aggregate_cmd->add_option("--out", csv_out, "Output flow CSV")->required();
    ov.bind(aggregate_cmd, "--window", "aggregation.window_s", "Bundle window in seconds or 'none'");

    // rfe
    auto* rfe = app.add_subcommand("rfe", "Recursive feature elimination");
    bool exclude_agg = false;
    std::string manifest_out;
    rfe->add_option("--in", csv_in, "Labeled flow CSV")->required();
    rfe->add_option("--out", manifest_out, "Selection manifest to write");
    rfe->add_flag("--exclude-aggregation", exclude_agg, "Leave the aggregation columns out");
    ov.bind(rfe, "--k", "rfe.k", "Features to keep");
    ov.bind(rfe, "--step", "rfe.step", "Features dropped per round");

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a flow classifier");
    std::string selection_in, model_path;
    train_cmd->add_option("--in", csv_in, "Labeled flow CSV")->required();
    train_cmd->add_option("--selection", selection_in, "Selection manifest from `rfe`");
    train_cmd->add_option("--model", model_path, "Output model JSON")->required();
    train_cmd->add_flag("--exclude-aggregation", exclude_agg, "Leave the aggregation columns out");
    ov.bind(train_cmd, "--hidden", "model.hidden", "Hidden layer sizes, comma separated");
    ov.bind(train_cmd, "--epochs", "model.epochs", "Training epochs");
    ov.bind(train_cmd, "--learning-rate", "model.learning_rate", "Learning rate");

    // eval
    auto* eval = app.add_subcommand("eval", "K-fold experiment, or score a saved classifier");
    std::string design, benign_in, report_out;
    std::vector<std::string> attack_specs;
    bool with_agg = false, extended = false;
    eval->add_option("--design", design, "binary, three_class or five_class");
    eval->add_option("--benign", benign_in, "Benign flow CSV");
    eval->add_option("--attack", attack_specs, "Attack class as name=csv; repeat per class");
    eval->add_flag("--with-aggregation", with_agg, "Include the aggregation features");
    eval->add_flag("--extended", extended, "Five-class only: ten features, eight hidden neurons");
    eval->add_option("--model", model_path, "Saved classifier to score instead of running k-fold");
    eval->add_option("--in", csv_in, "Labeled flow CSV scored with --model");
    eval->add_option("--report", report_out, "Output report JSON");
    ov.bind(eval, "--folds", "eval.folds", "Cross-validation folds");
    ov.bind(eval, "--k", "rfe.k", "Features kept by RFE");

    // zeroday
    auto* zeroday = app.add_subcommand("zeroday", "Autoencoder zero-day detection");
    zeroday->require_subcommand(1);
    zeroday->fallthrough();
    auto* zd_fit = zeroday->add_subcommand("fit", "Train on benign flows");
    zd_fit->add_option("--benign", benign_in, "Benign flow CSV")->required();
    zd_fit->add_option("--model", model_path, "Output model JSON")->required();
    zd_fit->add_flag("--exclude-aggregation", exclude_agg, "Leave the aggregation columns out");
    ov.bind(zd_fit, "--hidden", "zeroday.hidden", "Bottleneck width or 'auto'");
    ov.bind(zd_fit, "--epochs", "zeroday.epochs", "Training epochs");
    auto* zd_detect = zeroday->add_subcommand("detect", "Threshold reconstruction errors");
    std::string kind = "attack";
    zd_detect->add_option("--model", model_path, "Model JSON from `zeroday fit`")->required();
    zd_detect->add_option("--in", csv_in, "Flow CSV to score")->required();
    zd_detect->add_option("--kind", kind, "attack or benign samples")->check(CLI::IsMember({"attack", "benign"}));
    zd_detect->add_option("--report", report_out, "Output report JSON");
    ov.bind(zd_detect, "--thresholds", "zeroday.thresholds", "Comma-separated thresholds");

    // replicate
    auto* replicate_cmd = app.add_subcommand("replicate", "Run the full desk-scale study");
    std::string text_out, artifacts_dir;
    replicate_cmd->add_option("--out", report_out, "Output report JSON");
    replicate_cmd->add_option("--text", text_out, "Output text report");
    replicate_cmd->add_option("--artifacts", artifacts_dir, "Directory for capture, labels and flow CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "flowagg: " << e.what() << " (see --help)\n";
        return 1;
    }

    try {
        PipelineConfig cfg;
        if (!config_path.empty()) cfg.load_file(config_path);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + s + "'");
            cfg.set(s.substr(0, eq), s.substr(eq + 1), "--set");
        }
        ov.apply(cfg);
        cfg.validate();
        if (show_config) {
            std::cout << cfg.to_json().dump(2) << '\n';
            return 0;
        }
        const bool seed_given = app.get_option("--seed")->count() > 0;

        if (synth->parsed()) {
            ScenarioSpec spec;
            if (fs::exists(scenario)) {
                spec = load_scenario_file(scenario);
                if (seed_given) spec.seed = cfg.seed;
            } else {
                spec = builtin_scenario(scenario, cfg.seed, cfg.scale);
            }
            const SyntheticCapture cap = generate(spec);
            write_pcap(cap.packets, pcap_out);
            if (!labels_out.empty()) write_label_manifest(fs::path(labels_out), cap.manifest);
            std::cerr << "wrote " << cap.packets.size() << " packets, " << cap.manifest.size() << " flows\n";
        } else if (extract->parsed()) {
            const CaptureReadResult capture = read_pcap(pcap_in);
            std::vector<LabelEntry> manifest;
            if (!labels_in.empty()) manifest = read_label_manifest(labels_in);
            auto rows = extract_all(assemble_flows(capture.packets, cfg.flow));
            std::size_t unlabeled = 0;
            if (!manifest.empty()) unlabeled = apply_labels(rows, manifest);
            write_flow_csv(fs::path(csv_out), rows);
            std::cerr << "wrote " << rows.size() << " flows (" << capture.skipped << " packets skipped";
            if (!manifest.empty()) std::cerr << ", " << unlabeled << " flows unlabeled";
            std::cerr << ")\n";
        } else if (aggregate_cmd->parsed()) {
            auto rows = aggregate(read_flow_csv(fs::path(csv_in)), cfg.window);
            write_flow_csv(fs::path(csv_out), rows);
            std::cerr << "wrote " << rows.size() << " flows\n";
        } else if (rfe->parsed()) {
            const Dataset d = load_dataset(csv_in, !exclude_agg);
            RfeConfig rc = cfg.rfe;
            rc.seed = cfg.seed;
            const RfeResult result = rfe_select(d, rc);
            for (const auto& f : result.selected) std::cout << f << '\n';
            if (!manifest_out.empty())
                write_selection_manifest(manifest_out, selection_manifest(result, rc, exclude_agg));
        } else if (train_cmd->parsed()) {
            Dataset d = load_dataset(csv_in, !exclude_agg);
            if (!selection_in.empty()) {
                const auto names = read_selection_manifest(selection_in);
                if (exclude_agg && needs_aggregation(names))
                    throw ValidationError("selection uses aggregation features but --exclude-aggregation is set");
                d = d.select_columns(names);
            }
            const Classifier c = fit_classifier(d, cfg.model, cfg.seed);
            save_classifier(c, model_path);
            std::cerr << "trained on " << d.rows() << " rows, " << d.cols() << " features, "
                      << d.num_classes() << " classes\n";
        } else if (eval->parsed()) {
            ExperimentReport report;
            if (!model_path.empty()) {
                if (csv_in.empty()) throw ValidationError("eval --model needs --in <csv>");
                report = score_classifier(load_classifier(model_path), csv_in);
            } else {
                if (design.empty() || benign_in.empty() || attack_specs.empty())
                    throw ValidationError("eval needs --design, --benign and --attack (or --model and --in)");
                ExperimentInputs inputs;
                inputs.benign = read_flow_csv(fs::path(benign_in));
                for (const auto& a : attack_specs) {
                    const auto eq = a.find('=');
                    if (eq == std::string::npos || eq == 0 || eq + 1 == a.size())
                        throw ValidationError("--attack expects name=csv, got '" + a + "'");
                    auto rows = read_flow_csv(fs::path(a.substr(eq + 1)));
                    const std::string name = a.substr(0, eq);
                    for (auto& r : rows) r.label = name;
                    inputs.attacks.emplace_back(name, std::move(rows));
                }
                for (auto& r : inputs.benign) r.label = std::string(kBenignLabel);
                ExperimentConfig ec;
                ec.design = parse_design(design);
                ec.with_aggregation = with_agg;
                ec.extended = extended;
                ec.folds = cfg.folds;
                ec.rfe = cfg.rfe;
                ec.model = cfg.model;
                ec.seed = cfg.seed;
                report = run_experiment(inputs, ec);
            }
            std::cout << format_report(report);
            if (!report_out.empty()) write_json(report_out, to_json(report));
        } else if (zd_fit->parsed()) {
            AutoencoderSpec spec = cfg.autoencoder;
            spec.training.seed = cfg.seed;
            const ZeroDayModel m = fit_benign(load_dataset(benign_in, !exclude_agg), spec);
            save_zero_day(m, model_path);
        } else if (zd_detect->parsed()) {
            const ZeroDayModel m = load_zero_day(model_path);
            const Dataset d = load_dataset(csv_in, needs_aggregation(m.feature_names));
            const DetectionReport r =
                detect(m, d, cfg.thresholds, kind == "benign" ? SampleKind::Benign : SampleKind::Attack);
            print_detection(csv_in, r);
            if (!report_out.empty()) write_json(report_out, to_json(r));
        } else if (replicate_cmd->parsed()) {
            std::optional<fs::path> artifacts;
            if (!artifacts_dir.empty()) artifacts = artifacts_dir;
            const ReplicationResult r = replicate(cfg, artifacts);
            std::cout << r.text;
            if (!report_out.empty()) write_json(report_out, r.report);
            if (!text_out.empty()) write_text(text_out, r.text);
        }
        return 0;
    } catch (const IoError& e) {
        std::cerr << "flowagg: " << e.what() << '\n';
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "flowagg: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "flowagg: " << e.what() << '\n';
        return 1;
    } catch (const TrainingError& e) {
        std::cerr << "flowagg: training diverged at epoch " << e.epoch() << ": " << e.what()
                  << " (try a lower learning rate)\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "flowagg: " << e.what() << '\n';
        return 1;
    }
}
