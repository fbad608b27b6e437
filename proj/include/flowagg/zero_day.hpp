#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowagg/dataset.hpp"
#include "flowagg/neural_net.hpp"

namespace flowagg {

struct ThresholdPolicy {
    std::vector<double> thresholds{0.15, 0.10, 0.05};

    void validate() const;  // every threshold in (0, 1)
};

// Strict comparison: an error equal to the threshold is not flagged.
inline bool exceeds_threshold(double error, double threshold) { return error > threshold; }

struct AutoencoderSpec {
    std::optional<std::size_t> hidden;  // default ceil(inputs / 2)
    Activation hidden_activation = Activation::ReLU;
    Activation output_activation = Activation::Sigmoid;
    TrainingConfig training{0.5, 300, 64, Loss::MSE, 0};
};

// Autoencoder plus the scaler fitted on the benign training rows.
struct ZeroDayModel {
    std::vector<std::string> feature_names;
    MinMaxScaler scaler;
    MlpModel autoencoder;

    // Reconstruction error per row of unscaled features.
    Eigen::VectorXd errors(const Eigen::MatrixXd& raw_features) const;
    Eigen::VectorXd errors(const Dataset& data) const;
};

// Fits the scaler on the benign rows and trains an input -> hidden -> input
// autoencoder on the scaled rows. All labels in `benign` are ignored.
ZeroDayModel fit_benign(const Dataset& benign, const AutoencoderSpec& spec = {});

enum class SampleKind { Attack, Benign };

struct ThresholdOutcome {
    double threshold = 0.0;
    std::size_t flagged = 0;
    std::size_t total = 0;
    // Attack sets: flagged / total. Benign sets: (total - flagged) / total.
    double accuracy = 0.0;
};

struct DetectionReport {
    SampleKind kind = SampleKind::Attack;
    std::vector<ThresholdOutcome> outcomes;  // in policy order
};

DetectionReport detect_from_errors(std::span<const double> errors, const ThresholdPolicy& policy,
                                   SampleKind kind);
// Columns are matched to the model by name; a missing column is a schema
// error.
DetectionReport detect(const ZeroDayModel& model, const Dataset& samples,
                       const ThresholdPolicy& policy, SampleKind kind);

nlohmann::json to_json(const ZeroDayModel& model);
ZeroDayModel zero_day_from_json(const nlohmann::json& doc);
void save_zero_day(const ZeroDayModel& model, const std::filesystem::path& path);
ZeroDayModel load_zero_day(const std::filesystem::path& path);
nlohmann::json to_json(const DetectionReport& report);

}  // namespace flowagg
