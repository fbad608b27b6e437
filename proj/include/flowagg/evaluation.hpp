#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "flowagg/classifier.hpp"
#include "flowagg/dataset.hpp"
#include "flowagg/feature_selection.hpp"
#include "flowagg/flow_features.hpp"

namespace flowagg {

// One-vs-rest tallies per class.
struct ConfusionCounts {
    std::vector<std::size_t> tp, fp, fn;

    static ConfusionCounts from_predictions(std::span<const int> truth, std::span<const int> predicted,
                                            std::size_t num_classes);
    std::size_t num_classes() const { return tp.size(); }
};

struct Metric {
    double value = 0.0;
    bool zero_denominator = false;  // value forced to 0
};

Metric precision(const ConfusionCounts& c, std::size_t cls);  // TP / (TP + FP)
Metric recall(const ConfusionCounts& c, std::size_t cls);     // TP / (TP + FN)
Metric f1(const ConfusionCounts& c, std::size_t cls);         // 2TP / (2TP + FP + FN)

// Fold index per sample. Each class is shuffled and dealt round-robin, so
// every fold holds each class's share within one sample. Throws
// ValidationError naming any class with fewer than `folds` samples.
std::vector<int> stratified_folds(const Dataset& data, std::size_t folds, std::uint64_t seed);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population std over folds
};

struct ClassReport {
    std::string name;
    MeanStd precision, recall, f1;
};

struct ExperimentReport {
    std::string design;
    bool with_aggregation = false;
    std::size_t folds = 0;
    std::size_t hidden_neurons = 0;
    std::vector<std::string> selected_features;
    std::vector<ClassReport> classes;

    const ClassReport& cls(const std::string& name) const;
};

// Stratified k-fold: train on k-1 folds, score the held-out fold, aggregate
// per-class metrics as mean and population std over folds.
ExperimentReport kfold_evaluate(const Dataset& data, std::size_t folds, const ModelSpec& spec,
                                std::uint64_t seed);

enum class Design { Binary, ThreeClass, FiveClass };
std::string_view to_string(Design d);
Design parse_design(std::string_view name);

inline constexpr std::string_view kPortScanLabel = "portscan";

struct ExperimentInputs {
    std::vector<FlowFeatureVector> benign;
    // (class name, rows) in report order
    std::vector<std::pair<std::string, std::vector<FlowFeatureVector>>> attacks;
};

struct ExperimentConfig {
    Design design = Design::Binary;
    bool with_aggregation = false;
    // Five-class only: ten RFE features and eight hidden neurons.
    bool extended = false;
    std::size_t folds = 5;
    RfeConfig rfe{};
    ModelSpec model{};
    std::uint64_t seed = 0;
};

// RFE (aggregation columns excluded entirely when with_aggregation is off),
// then k-fold evaluation of a [k, hidden, classes] network on the selected
// features.
ExperimentReport run_experiment(const ExperimentInputs& inputs, const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentReport& report);
// Aligned text table, percentages with two decimals.
std::string format_report(const ExperimentReport& report);

}  // namespace flowagg
