#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "flowagg/dataset.hpp"
#include "flowagg/neural_net.hpp"

namespace flowagg {

// Network shape and training settings for a flow classifier.
struct ModelSpec {
    std::vector<std::size_t> hidden_layers{3};
    Activation hidden_activation = Activation::ReLU;
    TrainingConfig training{};
};

// Scaler, network and the schema they were trained on.
struct Classifier {
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;
    MinMaxScaler scaler;
    MlpModel model;

    std::vector<int> predict(const Eigen::MatrixXd& raw_features) const;
    // Picks the classifier's columns out of `data` by name and predicts.
    std::vector<int> predict(const Dataset& data) const;
};

// Fits the scaler on `data` and trains a softmax network of shape
// [features, hidden..., classes]. `seed` drives initialization and
// shuffling.
Classifier fit_classifier(const Dataset& data, const ModelSpec& spec, std::uint64_t seed);

nlohmann::json to_json(const Classifier& c);
Classifier classifier_from_json(const nlohmann::json& doc);
void save_classifier(const Classifier& c, const std::filesystem::path& path);
Classifier load_classifier(const std::filesystem::path& path);

}  // namespace flowagg
