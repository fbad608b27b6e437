#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace flowagg {

enum class Activation { ReLU, Tanh, Sigmoid, Softmax, Identity };
enum class Loss { MSE, CrossEntropy };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);
std::string_view to_string(Loss l);

// Fully connected feed-forward network. Unit j of layer l+1 computes
//   out_j = f(sum_i x_i * w_ij + b_j)
// with f the hidden activation on inner layers and the output activation on
// the last one.
struct MlpModel {
    std::vector<std::size_t> layer_sizes;
    // weights[l] has shape (layer_sizes[l], layer_sizes[l+1]); entry (i, j)
    // connects input i to unit j.
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::RowVectorXd> biases;
    Activation hidden_activation = Activation::ReLU;
    Activation output_activation = Activation::Softmax;

    std::size_t input_size() const { return layer_sizes.front(); }
    std::size_t output_size() const { return layer_sizes.back(); }
    std::size_t layer_count() const { return weights.size(); }

    // Checks shape chaining and finiteness; throws ValidationError.
    void validate() const;
    bool operator==(const MlpModel& other) const;
};

// Weights drawn uniformly from +-sqrt(6 / (fan_in + fan_out)); biases zero.
MlpModel make_mlp(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output,
                  std::uint64_t seed);

// Output activations for one sample. Throws ValidationError on a size
// mismatch or non-finite input.
Eigen::VectorXd forward(const MlpModel& model, std::span<const double> x);

// One sample per row.
Eigen::MatrixXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs);

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::RowVectorXd> biases;
};

// Mean loss over the rows of `inputs`. MSE averages over every output
// element; cross-entropy expects one-hot targets and a softmax output.
double loss_value(const MlpModel& model, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, Loss loss);

// Loss plus its analytic gradient with respect to every weight and bias.
double loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& targets, Loss loss, Gradients& grads);

struct TrainingConfig {
    double learning_rate = 0.05;
    int epochs = 500;
    std::size_t batch_size = 0;  // 0 means full batch
    Loss loss = Loss::CrossEntropy;
    std::uint64_t seed = 0;  // initialization and mini-batch shuffling

    void validate() const;
};

struct TrainResult {
    MlpModel model;
    std::vector<double> loss_history;  // one entry per epoch
};

// Plain gradient descent: w <- w - learning_rate * dE/dw. Throws
// TrainingError naming the epoch if the loss becomes non-finite.
TrainResult train(MlpModel model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                  const TrainingConfig& cfg);

Eigen::MatrixXd one_hot(std::span<const int> labels, std::size_t num_classes);

// Cross-entropy training against class indices. Every class in
// [0, output_size) must occur at least once.
TrainResult train_classifier(MlpModel model, const Eigen::MatrixXd& inputs,
                             std::span<const int> labels, const TrainingConfig& cfg);

// Index of the largest value; the lowest index wins ties.
std::size_t argmax(std::span<const double> values);
std::size_t predict_class(const MlpModel& model, std::span<const double> x);
std::vector<int> predict_classes(const MlpModel& model, const Eigen::MatrixXd& inputs);

// Mean squared difference between x and the model's reconstruction of x.
double reconstruction_error(const MlpModel& model, std::span<const double> x);
Eigen::VectorXd reconstruction_errors(const MlpModel& model, const Eigen::MatrixXd& inputs);

// Per-column min-max scaling to [0, 1] using the fitted range. Columns that
// were constant during fitting map to 0. Values outside the fitted range are
// not clipped.
struct MinMaxScaler {
    Eigen::RowVectorXd min;
    Eigen::RowVectorXd max;

    static MinMaxScaler fit(const Eigen::MatrixXd& data);
    Eigen::MatrixXd transform(const Eigen::MatrixXd& data) const;
    std::size_t width() const { return static_cast<std::size_t>(min.size()); }
    bool constant_column(std::size_t c) const { return !(max[c] > min[c]); }
};

nlohmann::json to_json(const MlpModel& model);
MlpModel mlp_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const MinMaxScaler& scaler);
MinMaxScaler scaler_from_json(const nlohmann::json& doc);

inline constexpr int kModelFormatVersion = 1;

}  // namespace flowagg
