#include "flowagg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "flowagg/errors.hpp"
#include "flowagg/random.hpp"

namespace flowagg {

ConfusionCounts ConfusionCounts::from_predictions(std::span<const int> truth,
                                                  std::span<const int> predicted,
                                                  std::size_t num_classes) {
    if (truth.size() != predicted.size())
        throw ValidationError("prediction count does not match label count");
    ConfusionCounts c{std::vector<std::size_t>(num_classes, 0),
                      std::vector<std::size_t>(num_classes, 0),
                      std::vector<std::size_t>(num_classes, 0)};
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto t = static_cast<std::size_t>(truth[i]);
        const auto p = static_cast<std::size_t>(predicted[i]);
        if (t >= num_classes || p >= num_classes) throw ValidationError("class index out of range");
        if (t == p) {
            ++c.tp[t];
        } else {
            ++c.fn[t];
            ++c.fp[p];
        }
    }
    return c;
}

namespace {

Metric ratio(double num, double den) {
    if (den == 0.0) return {0.0, true};
    return {num / den, false};
}

void check_class(const ConfusionCounts& c, std::size_t cls) {
    if (cls >= c.num_classes()) throw ValidationError("class index out of range");
}

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd m;
    if (xs.empty()) return m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(xs.size()));
    return m;
}

std::string percent(const MeanStd& m) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f%% +- %.2f%%", 100.0 * m.mean, 100.0 * m.std);
    return buf;
}

nlohmann::json to_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

}  // namespace

Metric precision(const ConfusionCounts& c, std::size_t cls) {
    check_class(c, cls);
    return ratio(static_cast<double>(c.tp[cls]), static_cast<double>(c.tp[cls] + c.fp[cls]));
}

Metric recall(const ConfusionCounts& c, std::size_t cls) {
    check_class(c, cls);
    return ratio(static_cast<double>(c.tp[cls]), static_cast<double>(c.tp[cls] + c.fn[cls]));
}

Metric f1(const ConfusionCounts& c, std::size_t cls) {
    check_class(c, cls);
    return ratio(2.0 * static_cast<double>(c.tp[cls]),
                 static_cast<double>(2 * c.tp[cls] + c.fp[cls] + c.fn[cls]));
}

std::vector<int> stratified_folds(const Dataset& data, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw ValidationError("fold count must be >= 2");
    const auto counts = data.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] < folds)
            throw ValidationError("class '" + data.class_names[c] + "' has " +
                                  std::to_string(counts[c]) + " samples, fewer than " +
                                  std::to_string(folds) + " folds");

    Rng rng(seed);
    std::vector<int> assignment(data.rows(), -1);
    std::size_t next = 0;  // carried across classes to balance fold sizes
    for (std::size_t c = 0; c < counts.size(); ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < data.rows(); ++i)
            if (static_cast<std::size_t>(data.labels[i]) == c) members.push_back(i);
        rng.shuffle(members);
        for (std::size_t m : members) assignment[m] = static_cast<int>(next++ % folds);
    }
    return assignment;
}

const ClassReport& ExperimentReport::cls(const std::string& name) const {
    for (const auto& c : classes)
        if (c.name == name) return c;
    throw ValidationError("report has no class '" + name + "'");
}

ExperimentReport kfold_evaluate(const Dataset& data, std::size_t folds, const ModelSpec& spec,
                                std::uint64_t seed) {
    data.validate();
    const std::vector<int> assignment = stratified_folds(data, folds, seed);
    const std::size_t k = data.num_classes();
    std::vector<std::vector<double>> prec(k), rec(k), f(k);

    for (std::size_t fold = 0; fold < folds; ++fold) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < data.rows(); ++i)
            (assignment[i] == static_cast<int>(fold) ? test_rows : train_rows).push_back(i);
        const Dataset train = data.select_rows(train_rows);
        const Dataset test = data.select_rows(test_rows);
        const Classifier model = fit_classifier(train, spec, seed + 1000003 * (fold + 1));
        const auto predicted = model.predict(test.features);
        const auto counts = ConfusionCounts::from_predictions(test.labels, predicted, k);
        for (std::size_t c = 0; c < k; ++c) {
            prec[c].push_back(precision(counts, c).value);
            rec[c].push_back(recall(counts, c).value);
            f[c].push_back(f1(counts, c).value);
        }
    }

    ExperimentReport report;
    report.folds = folds;
    report.hidden_neurons = spec.hidden_layers.empty() ? 0 : spec.hidden_layers.front();
    report.selected_features = data.feature_names;
    for (std::size_t c = 0; c < k; ++c)
        report.classes.push_back(
            {data.class_names[c], mean_std(prec[c]), mean_std(rec[c]), mean_std(f[c])});
    return report;
}

std::string_view to_string(Design d) {
    switch (d) {
        case Design::Binary: return "binary";
        case Design::ThreeClass: return "three_class";
        case Design::FiveClass: return "five_class";
    }
    return "?";
}

Design parse_design(std::string_view name) {
    for (auto d : {Design::Binary, Design::ThreeClass, Design::FiveClass})
        if (to_string(d) == name) return d;
    throw ValidationError("unknown design '" + std::string(name) +
                          "' (expected binary, three_class or five_class)");
}

ExperimentReport run_experiment(const ExperimentInputs& inputs, const ExperimentConfig& cfg) {
    const std::size_t attacks = inputs.attacks.size();
    switch (cfg.design) {
        case Design::Binary:
            if (attacks != 1) throw ValidationError("binary design needs exactly one attack class");
            break;
        case Design::ThreeClass: {
            const bool has_scan = std::any_of(inputs.attacks.begin(), inputs.attacks.end(),
                                              [](const auto& a) { return a.first == kPortScanLabel; });
            if (attacks != 2 || !has_scan)
                throw ValidationError("three_class design needs 'portscan' plus one attack class");
            break;
        }
        case Design::FiveClass:
            if (attacks != 4) throw ValidationError("five_class design needs four attack classes");
            break;
    }
    if (cfg.extended && cfg.design != Design::FiveClass)
        throw ValidationError("the extended feature mode applies to the five_class design only");
    if (inputs.benign.empty()) throw ValidationError("no benign rows");

    std::vector<std::string> class_names{std::string(kBenignLabel)};
    std::vector<FlowFeatureVector> rows = inputs.benign;
    for (auto& r : rows) r.label = kBenignLabel;
    for (const auto& [name, attack_rows] : inputs.attacks) {
        if (attack_rows.empty()) throw ValidationError("attack class '" + name + "' has no rows");
        if (std::find(class_names.begin(), class_names.end(), name) != class_names.end())
            throw ValidationError("duplicate class '" + name + "'");
        class_names.push_back(name);
        for (auto r : attack_rows) {
            r.label = name;
            rows.push_back(std::move(r));
        }
    }

    const Dataset data = build_dataset(rows, cfg.with_aggregation, class_names);
    RfeConfig rfe = cfg.rfe;
    ModelSpec model = cfg.model;
    if (cfg.extended) {
        rfe.k = 10;
        model.hidden_layers = {8};
    }
    rfe.seed = cfg.seed;
    const RfeResult selection = rfe_select(data, rfe);
    ExperimentReport report =
        kfold_evaluate(data.select_columns(selection.selected), cfg.folds, model, cfg.seed + 1);
    report.design = std::string(to_string(cfg.design));
    report.with_aggregation = cfg.with_aggregation;
    return report;
}

nlohmann::json to_json(const ExperimentReport& report) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& c : report.classes)
        classes.push_back({{"class", c.name},
                           {"precision", to_json(c.precision)},
                           {"recall", to_json(c.recall)},
                           {"f1", to_json(c.f1)}});
    return {
        {"design", report.design},
        {"with_aggregation", report.with_aggregation},
        {"folds", report.folds},
        {"hidden_neurons", report.hidden_neurons},
        {"selected_features", report.selected_features},
        {"classes", classes},
    };
}

std::string format_report(const ExperimentReport& report) {
    std::ostringstream out;
    out << report.design << " (" << report.folds << "-fold, "
        << (report.with_aggregation ? "with" : "without") << " aggregation features, "
        << report.selected_features.size() << " inputs, " << report.hidden_neurons
        << " hidden)\n";
    out << "  features:";
    for (const auto& f : report.selected_features) out << ' ' << f;
    out << '\n';
    std::size_t width = 5;
    for (const auto& c : report.classes) width = std::max(width, c.name.size());
    char line[256];
    std::snprintf(line, sizeof line, "  %-*s  %-20s  %-20s  %-20s\n", static_cast<int>(width),
                  "class", "precision", "recall", "f1");
    out << line;
    for (const auto& c : report.classes) {
        std::snprintf(line, sizeof line, "  %-*s  %-20s  %-20s  %-20s\n", static_cast<int>(width),
                      c.name.c_str(), percent(c.precision).c_str(), percent(c.recall).c_str(),
                      percent(c.f1).c_str());
        out << line;
    }
    return out.str();
}

}  // namespace flowagg
