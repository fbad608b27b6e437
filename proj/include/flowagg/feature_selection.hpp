#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flowagg/classifier.hpp"
#include "flowagg/dataset.hpp"

namespace flowagg {

struct RfeConfig {
    std::size_t k = 5;
    std::size_t step = 1;
    ModelSpec inner{};  // network retrained on each round
    std::uint64_t seed = 0;

    void validate(std::size_t feature_count) const;
};

struct RfeRound {
    std::vector<std::string> features;   // features present in this round
    std::vector<double> importance;      // parallel to `features`
    std::vector<std::string> eliminated; // dropped at the end of the round
};

struct RfeResult {
    std::vector<std::string> selected;    // survivors, most important first
    std::vector<std::string> eliminated;  // in elimination order
    std::vector<RfeRound> rounds;
};

// Importance of each input as the summed absolute first-layer weight. Inputs
// that were constant in the training data score 0.
std::vector<double> input_importance(const Classifier& c);

// Recursive feature elimination: train on the remaining columns, drop the
// `step` least important (lowest index first on ties), repeat until k remain.
// Each round trains from a fresh seeded initialization.
RfeResult rfe_select(const Dataset& data, const RfeConfig& cfg);

nlohmann::json selection_manifest(const RfeResult& result, const RfeConfig& cfg,
                                  bool excluded_aggregation);
void write_selection_manifest(const std::filesystem::path& path, const nlohmann::json& manifest);
// Selected feature names from a manifest written by write_selection_manifest.
std::vector<std::string> read_selection_manifest(const std::filesystem::path& path);

}  // namespace flowagg
