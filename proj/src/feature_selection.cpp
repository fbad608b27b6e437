#include "flowagg/feature_selection.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "flowagg/errors.hpp"

namespace flowagg {

void RfeConfig::validate(std::size_t feature_count) const {
    if (k < 1) throw ValidationError("rfe.k must be >= 1");
    if (k > feature_count)
        throw ValidationError("rfe.k = " + std::to_string(k) + " exceeds the " +
                              std::to_string(feature_count) + " available features");
    if (step < 1) throw ValidationError("rfe.step must be >= 1");
}

std::vector<double> input_importance(const Classifier& c) {
    const Eigen::VectorXd sums = c.model.weights.front().cwiseAbs().rowwise().sum();
    std::vector<double> out(sums.data(), sums.data() + sums.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        if (c.scaler.constant_column(i)) out[i] = 0.0;
    return out;
}

RfeResult rfe_select(const Dataset& data, const RfeConfig& cfg) {
    data.validate();
    cfg.validate(data.cols());
    if (data.num_classes() < 2) throw ValidationError("RFE needs at least two classes");

    RfeResult result;
    std::vector<std::size_t> remaining(data.cols());
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});
    std::vector<double> last_importance;

    for (std::uint64_t round = 0; remaining.size() > cfg.k; ++round) {
        const Dataset subset = data.select_columns(remaining);
        const Classifier c = fit_classifier(subset, cfg.inner, cfg.seed + 7919 * round);
        const std::vector<double> importance = input_importance(c);

        std::vector<std::size_t> order(remaining.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return importance[a] < importance[b]; });
        const std::size_t drop = std::min(cfg.step, remaining.size() - cfg.k);

        RfeRound trace{subset.feature_names, importance, {}};
        std::vector<bool> dropped(remaining.size(), false);
        for (std::size_t i = 0; i < drop; ++i) {
            dropped[order[i]] = true;
            trace.eliminated.push_back(subset.feature_names[order[i]]);
            result.eliminated.push_back(subset.feature_names[order[i]]);
        }
        std::vector<std::size_t> next;
        last_importance.clear();
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            if (dropped[i]) continue;
            next.push_back(remaining[i]);
            last_importance.push_back(importance[i]);
        }
        remaining = std::move(next);
        result.rounds.push_back(std::move(trace));
    }

    std::vector<std::size_t> rank(remaining.size());
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    if (!last_importance.empty())
        std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
            return last_importance[a] > last_importance[b];
        });
    for (std::size_t r : rank) result.selected.push_back(data.feature_names[remaining[r]]);
    return result;
}

nlohmann::json selection_manifest(const RfeResult& result, const RfeConfig& cfg,
                                  bool excluded_aggregation) {
    return {
        {"format", "flowagg.selection"},
        {"version", 1},
        {"k", cfg.k},
        {"step", cfg.step},
        {"seed", cfg.seed},
        {"excluded_aggregation", excluded_aggregation},
        {"selected", result.selected},
        {"eliminated", result.eliminated},
    };
}

void write_selection_manifest(const std::filesystem::path& path, const nlohmann::json& manifest) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << manifest.dump(2) << '\n';
}

std::vector<std::string> read_selection_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    try {
        nlohmann::json doc;
        in >> doc;
        if (doc.at("format") != "flowagg.selection")
            throw ValidationError(path.string() + " is not a selection manifest");
        auto selected = doc.at("selected").get<std::vector<std::string>>();
        if (selected.empty()) throw ValidationError(path.string() + ": empty selection");
        return selected;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

}  // namespace flowagg
