#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flowagg/evaluation.hpp"
#include "flowagg/flow_aggregation.hpp"
#include "flowagg/flow_assembly.hpp"
#include "flowagg/synth_traffic.hpp"
#include "flowagg/zero_day.hpp"

namespace flowagg {

// Every tunable of the end-to-end workflows. Values come from, in
// increasing precedence: the defaults below, a config file, CLI flags.
struct PipelineConfig {
    FlowTimeouts flow{};
    BundleWindow window{};  // unbounded
    RfeConfig rfe{};
    ModelSpec model{};
    std::size_t folds = 5;
    ThresholdPolicy thresholds{};
    AutoencoderSpec autoencoder{};
    ScenarioScale scale{};
    std::uint64_t seed = 7;

    PipelineConfig();

    // Sets one "section.key" entry; throws ValidationError for unknown keys
    // or bad values.
    void set(std::string_view key, std::string_view value, const std::string& where = "config");
    void load_file(const std::filesystem::path& path);
    void validate() const;
    nlohmann::json to_json() const;

    static std::vector<std::string> keys();
};

// packets -> flows -> features (-> labels) -> aggregation
struct FlowTable {
    std::vector<FlowFeatureVector> rows;
    std::size_t skipped_packets = 0;
    std::size_t unlabeled = 0;
};
FlowTable flows_from_packets(std::span<const PacketRecord> packets, const PipelineConfig& cfg,
                             std::span<const LabelEntry> manifest = {});

// Rows grouped by label, keyed in order of first appearance.
std::vector<std::pair<std::string, std::vector<FlowFeatureVector>>> split_by_label(
    std::span<const FlowFeatureVector> rows);

struct ZeroDayStudy {
    DetectionReport benign_validation;
    std::vector<std::pair<std::string, DetectionReport>> attacks;
};

// Trains the autoencoder on a seeded 80% of the benign rows and evaluates the
// held-out benign rows plus every attack class.
ZeroDayStudy zero_day_study(std::span<const FlowFeatureVector> benign,
                            const std::vector<std::pair<std::string, std::vector<FlowFeatureVector>>>& attacks,
                            bool with_aggregation, const PipelineConfig& cfg);

struct ReplicationResult {
    nlohmann::json report;
    std::string text;
};

// Desk-scale study: synthesize the five-class scenario, extract and aggregate
// flows, run the binary, three-class and five-class designs with and without
// aggregation features, then the zero-day study. When `artifacts` is set the
// capture, labels and flow CSV are written there.
ReplicationResult replicate(const PipelineConfig& cfg,
                            const std::optional<std::filesystem::path>& artifacts = std::nullopt);

}  // namespace flowagg
