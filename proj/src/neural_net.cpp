#include "flowagg/neural_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flowagg/errors.hpp"
#include "flowagg/random.hpp"

namespace flowagg {

namespace {

struct Activations {
    std::vector<Eigen::MatrixXd> pre;   // z for each layer
    std::vector<Eigen::MatrixXd> post;  // post[0] is the input, post[l+1] = f(pre[l])
};

void apply(Activation a, const Eigen::MatrixXd& z, Eigen::MatrixXd& out) {
    switch (a) {
        case Activation::ReLU: out = z.cwiseMax(0.0); break;
        case Activation::Tanh: out = z.array().tanh().matrix(); break;
        case Activation::Sigmoid: out = (1.0 / (1.0 + (-z.array()).exp())).matrix(); break;
        case Activation::Identity: out = z; break;
        case Activation::Softmax: {
            out.resize(z.rows(), z.cols());
            for (Eigen::Index r = 0; r < z.rows(); ++r) {
                const auto shifted = (z.row(r).array() - z.row(r).maxCoeff()).exp();
                out.row(r) = (shifted / shifted.sum()).matrix();
            }
            break;
        }
    }
}

// Elementwise derivative of the activation, expressed through z and f(z).
Eigen::ArrayXXd derivative(Activation a, const Eigen::MatrixXd& z, const Eigen::MatrixXd& fz) {
    switch (a) {
        case Activation::ReLU: return (z.array() > 0.0).cast<double>();
        case Activation::Tanh: return 1.0 - fz.array().square();
        case Activation::Sigmoid: return fz.array() * (1.0 - fz.array());
        case Activation::Identity: return Eigen::ArrayXXd::Ones(z.rows(), z.cols());
        case Activation::Softmax: break;
    }
    throw ValidationError("softmax has no elementwise derivative");
}

Activations run_forward(const MlpModel& model, const Eigen::MatrixXd& inputs) {
    Activations acts;
    acts.pre.resize(model.layer_count());
    acts.post.resize(model.layer_count() + 1);
    acts.post[0] = inputs;
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        acts.pre[l] = acts.post[l] * model.weights[l];
        acts.pre[l].rowwise() += model.biases[l];
        const bool last = l + 1 == model.layer_count();
        apply(last ? model.output_activation : model.hidden_activation, acts.pre[l],
              acts.post[l + 1]);
    }
    return acts;
}

void check_input_width(const MlpModel& model, Eigen::Index cols) {
    if (static_cast<std::size_t>(cols) != model.input_size())
        throw ValidationError("input has " + std::to_string(cols) + " features, model expects " +
                              std::to_string(model.input_size()));
}

void check_loss_pairing(const MlpModel& model, Loss loss) {
    if (loss == Loss::CrossEntropy && model.output_activation != Activation::Softmax)
        throw ValidationError("cross-entropy loss requires a softmax output layer");
    if (loss == Loss::MSE && model.output_activation == Activation::Softmax)
        throw ValidationError("MSE loss is not supported with a softmax output layer");
}

double loss_from(const Activations& acts, const Eigen::MatrixXd& targets, Loss loss) {
    const auto& out = acts.post.back();
    const double n = static_cast<double>(out.rows());
    if (loss == Loss::MSE)
        return (out - targets).squaredNorm() / (n * static_cast<double>(out.cols()));
    // log-softmax from the pre-activations for numerical stability
    const auto& z = acts.pre.back();
    double total = 0.0;
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        const double m = z.row(r).maxCoeff();
        const double lse = m + std::log((z.row(r).array() - m).exp().sum());
        total -= (targets.row(r).array() * (z.row(r).array() - lse)).sum();
    }
    return total / n;
}

void check_targets(const MlpModel& model, const Eigen::MatrixXd& inputs,
                   const Eigen::MatrixXd& targets) {
    check_input_width(model, inputs.cols());
    if (targets.rows() != inputs.rows() ||
        static_cast<std::size_t>(targets.cols()) != model.output_size())
        throw ValidationError("target matrix shape does not match inputs/model output");
    if (inputs.rows() == 0) throw ValidationError("no training samples");
}

}  // namespace

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::ReLU: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Softmax: return "softmax";
        case Activation::Identity: return "identity";
    }
    return "?";
}

Activation parse_activation(std::string_view name) {
    for (auto a : {Activation::ReLU, Activation::Tanh, Activation::Sigmoid, Activation::Softmax,
                   Activation::Identity})
        if (to_string(a) == name) return a;
    throw ValidationError("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Loss l) { return l == Loss::MSE ? "mse" : "cross_entropy"; }

void MlpModel::validate() const {
    if (layer_sizes.size() < 2) throw ValidationError("a network needs at least two layers");
    if (weights.size() + 1 != layer_sizes.size() || biases.size() != weights.size())
        throw ValidationError("layer count does not match layer_sizes");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (static_cast<std::size_t>(weights[l].rows()) != layer_sizes[l] ||
            static_cast<std::size_t>(weights[l].cols()) != layer_sizes[l + 1] ||
            static_cast<std::size_t>(biases[l].size()) != layer_sizes[l + 1])
            throw ValidationError("layer " + std::to_string(l) + " has the wrong shape");
        if (!weights[l].allFinite() || !biases[l].allFinite())
            throw ValidationError("layer " + std::to_string(l) + " has non-finite parameters");
    }
    if (hidden_activation == Activation::Softmax)
        throw ValidationError("softmax is only valid as an output activation");
}

bool MlpModel::operator==(const MlpModel& other) const {
    if (layer_sizes != other.layer_sizes || hidden_activation != other.hidden_activation ||
        output_activation != other.output_activation || weights.size() != other.weights.size())
        return false;
    for (std::size_t l = 0; l < weights.size(); ++l)
        if (weights[l] != other.weights[l] || biases[l] != other.biases[l]) return false;
    return true;
}

MlpModel make_mlp(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output,
                  std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw ValidationError("a network needs at least two layers");
    for (auto s : layer_sizes)
        if (s == 0) throw ValidationError("layer sizes must be positive");

    MlpModel model;
    model.layer_sizes = std::move(layer_sizes);
    model.hidden_activation = hidden;
    model.output_activation = output;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
        const auto fan_in = static_cast<Eigen::Index>(model.layer_sizes[l]);
        const auto fan_out = static_cast<Eigen::Index>(model.layer_sizes[l + 1]);
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Eigen::MatrixXd w(fan_in, fan_out);
        for (Eigen::Index i = 0; i < fan_in; ++i)
            for (Eigen::Index j = 0; j < fan_out; ++j) w(i, j) = rng.uniform(-bound, bound);
        model.weights.push_back(std::move(w));
        model.biases.push_back(Eigen::RowVectorXd::Zero(fan_out));
    }
    model.validate();
    return model;
}

Eigen::VectorXd forward(const MlpModel& model, std::span<const double> x) {
    check_input_width(model, static_cast<Eigen::Index>(x.size()));
    Eigen::MatrixXd row(1, static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) throw ValidationError("input contains a non-finite value");
        row(0, static_cast<Eigen::Index>(i)) = x[i];
    }
    return forward_batch(model, row).row(0).transpose();
}

Eigen::MatrixXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs) {
    check_input_width(model, inputs.cols());
    return run_forward(model, inputs).post.back();
}

double loss_value(const MlpModel& model, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, Loss loss) {
    check_targets(model, inputs, targets);
    check_loss_pairing(model, loss);
    return loss_from(run_forward(model, inputs), targets, loss);
}

double loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& targets, Loss loss, Gradients& grads) {
    check_targets(model, inputs, targets);
    check_loss_pairing(model, loss);
    const Activations acts = run_forward(model, inputs);
    const double value = loss_from(acts, targets, loss);

    const std::size_t layers = model.layer_count();
    grads.weights.resize(layers);
    grads.biases.resize(layers);
    const double n = static_cast<double>(inputs.rows());
    const auto& out = acts.post.back();

    Eigen::MatrixXd delta;  // dE/dz of the current layer
    if (loss == Loss::CrossEntropy) {
        delta = (out - targets) / n;
    } else {
        const double scale = 2.0 / (n * static_cast<double>(out.cols()));
        delta = ((out - targets).array() * scale *
                 derivative(model.output_activation, acts.pre.back(), out))
                    .matrix();
    }
    for (std::size_t l = layers; l-- > 0;) {
        grads.weights[l].noalias() = acts.post[l].transpose() * delta;
        grads.biases[l] = delta.colwise().sum();
        if (l == 0) break;
        Eigen::MatrixXd upstream = delta * model.weights[l].transpose();
        delta = (upstream.array() *
                 derivative(model.hidden_activation, acts.pre[l - 1], acts.post[l]))
                    .matrix();
    }
    return value;
}

void TrainingConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw ValidationError("learning rate must be a finite value >= 0");
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
}

TrainResult train(MlpModel model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                  const TrainingConfig& cfg) {
    cfg.validate();
    model.validate();
    check_targets(model, inputs, targets);
    check_loss_pairing(model, cfg.loss);

    TrainResult result;
    result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
    Gradients grads;
    const auto n = static_cast<std::size_t>(inputs.rows());
    const bool full_batch = cfg.batch_size == 0 || cfg.batch_size >= n;

    auto step = [&](const Eigen::MatrixXd& x, const Eigen::MatrixXd& t) {
        const double value = loss_and_gradients(model, x, t, cfg.loss, grads);
        for (std::size_t l = 0; l < model.layer_count(); ++l) {
            model.weights[l] -= cfg.learning_rate * grads.weights[l];
            model.biases[l] -= cfg.learning_rate * grads.biases[l];
        }
        return value;
    };

    Rng shuffler(cfg.seed ^ 0x5deece66dULL);
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        if (full_batch) {
            epoch_loss = step(inputs, targets);
        } else {
            shuffler.shuffle(order);
            for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
                const std::size_t end = std::min(n, begin + cfg.batch_size);
                std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                              order.begin() + static_cast<std::ptrdiff_t>(end));
                const Eigen::MatrixXd xb = inputs(idx, Eigen::all);
                const Eigen::MatrixXd tb = targets(idx, Eigen::all);
                epoch_loss += step(xb, tb) * static_cast<double>(end - begin);
            }
            epoch_loss /= static_cast<double>(n);
        }
        if (!std::isfinite(epoch_loss))
            throw TrainingError("loss became non-finite at epoch " + std::to_string(epoch), epoch);
        for (std::size_t l = 0; l < model.layer_count(); ++l)
            if (!model.weights[l].allFinite() || !model.biases[l].allFinite())
                throw TrainingError("parameters became non-finite at epoch " +
                                        std::to_string(epoch),
                                    epoch);
        result.loss_history.push_back(epoch_loss);
    }
    result.model = std::move(model);
    return result;
}

Eigen::MatrixXd one_hot(std::span<const int> labels, std::size_t num_classes) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()),
                                                static_cast<Eigen::Index>(num_classes));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes)
            throw ValidationError("label " + std::to_string(labels[i]) + " is not a valid class index");
        out(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    }
    return out;
}

TrainResult train_classifier(MlpModel model, const Eigen::MatrixXd& inputs,
                             std::span<const int> labels, const TrainingConfig& cfg) {
    if (static_cast<Eigen::Index>(labels.size()) != inputs.rows())
        throw ValidationError("label count does not match sample count");
    const Eigen::MatrixXd targets = one_hot(labels, model.output_size());
    for (Eigen::Index c = 0; c < targets.cols(); ++c)
        if (targets.col(c).sum() == 0.0)
            throw ValidationError("class " + std::to_string(c) + " has no training samples");
    TrainingConfig ce = cfg;
    ce.loss = Loss::CrossEntropy;
    return train(std::move(model), inputs, targets, ce);
}

std::size_t argmax(std::span<const double> values) {
    if (values.empty()) throw ValidationError("argmax of an empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

std::size_t predict_class(const MlpModel& model, std::span<const double> x) {
    const Eigen::VectorXd out = forward(model, x);
    return argmax(std::span<const double>(out.data(), static_cast<std::size_t>(out.size())));
}

std::vector<int> predict_classes(const MlpModel& model, const Eigen::MatrixXd& inputs) {
    const Eigen::MatrixXd out = forward_batch(model, inputs);
    std::vector<int> classes(static_cast<std::size_t>(out.rows()));
    std::vector<double> row(static_cast<std::size_t>(out.cols()));
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        for (Eigen::Index c = 0; c < out.cols(); ++c) row[static_cast<std::size_t>(c)] = out(r, c);
        classes[static_cast<std::size_t>(r)] = static_cast<int>(argmax(row));
    }
    return classes;
}

double reconstruction_error(const MlpModel& model, std::span<const double> x) {
    if (model.output_size() != model.input_size())
        throw ValidationError("reconstruction needs output size equal to input size");
    const Eigen::VectorXd out = forward(model, x);
    const Eigen::Map<const Eigen::VectorXd> in(x.data(), static_cast<Eigen::Index>(x.size()));
    return (out - in).squaredNorm() / static_cast<double>(x.size());
}

Eigen::VectorXd reconstruction_errors(const MlpModel& model, const Eigen::MatrixXd& inputs) {
    if (model.output_size() != model.input_size())
        throw ValidationError("reconstruction needs output size equal to input size");
    const Eigen::MatrixXd out = forward_batch(model, inputs);
    return (out - inputs).rowwise().squaredNorm() / static_cast<double>(inputs.cols());
}

MinMaxScaler MinMaxScaler::fit(const Eigen::MatrixXd& data) {
    if (data.rows() == 0) throw ValidationError("cannot fit a scaler on zero rows");
    return MinMaxScaler{data.colwise().minCoeff(), data.colwise().maxCoeff()};
}

Eigen::MatrixXd MinMaxScaler::transform(const Eigen::MatrixXd& data) const {
    if (data.cols() != min.size())
        throw ValidationError("scaler fitted on " + std::to_string(min.size()) +
                              " columns, got " + std::to_string(data.cols()));
    Eigen::MatrixXd out(data.rows(), data.cols());
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        const double range = max[c] - min[c];
        if (range > 0.0)
            out.col(c) = (data.col(c).array() - min[c]) / range;
        else
            out.col(c).setZero();
    }
    return out;
}

nlohmann::json to_json(const MlpModel& model) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        std::vector<double> w;
        w.reserve(static_cast<std::size_t>(model.weights[l].size()));
        for (Eigen::Index i = 0; i < model.weights[l].rows(); ++i)
            for (Eigen::Index j = 0; j < model.weights[l].cols(); ++j)
                w.push_back(model.weights[l](i, j));
        std::vector<double> b(model.biases[l].data(), model.biases[l].data() + model.biases[l].size());
        layers.push_back({{"weights", w}, {"biases", b}});
    }
    return {
        {"format", "flowagg.mlp"},
        {"version", kModelFormatVersion},
        {"layer_sizes", model.layer_sizes},
        {"hidden_activation", to_string(model.hidden_activation)},
        {"output_activation", to_string(model.output_activation)},
        {"layers", layers},
    };
}

MlpModel mlp_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("format") != "flowagg.mlp")
            throw ValidationError("document is not a flowagg model");
        if (doc.at("version").get<int>() != kModelFormatVersion)
            throw ValidationError("unsupported model version " + doc.at("version").dump());
        MlpModel model;
        model.layer_sizes = doc.at("layer_sizes").get<std::vector<std::size_t>>();
        model.hidden_activation = parse_activation(doc.at("hidden_activation").get<std::string>());
        model.output_activation = parse_activation(doc.at("output_activation").get<std::string>());
        const auto& layers = doc.at("layers");
        if (layers.size() + 1 != model.layer_sizes.size())
            throw ValidationError("model layer list does not match layer_sizes");
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto rows = static_cast<Eigen::Index>(model.layer_sizes[l]);
            const auto cols = static_cast<Eigen::Index>(model.layer_sizes[l + 1]);
            const auto w = layers[l].at("weights").get<std::vector<double>>();
            const auto b = layers[l].at("biases").get<std::vector<double>>();
            if (static_cast<Eigen::Index>(w.size()) != rows * cols ||
                static_cast<Eigen::Index>(b.size()) != cols)
                throw ValidationError("layer " + std::to_string(l) + " has the wrong size");
            Eigen::MatrixXd m(rows, cols);
            for (Eigen::Index i = 0; i < rows; ++i)
                for (Eigen::Index j = 0; j < cols; ++j)
                    m(i, j) = w[static_cast<std::size_t>(i * cols + j)];
            model.weights.push_back(std::move(m));
            model.biases.push_back(Eigen::Map<const Eigen::RowVectorXd>(b.data(), cols));
        }
        model.validate();
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed model document: ") + e.what());
    }
}

nlohmann::json to_json(const MinMaxScaler& scaler) {
    return {{"min", std::vector<double>(scaler.min.data(), scaler.min.data() + scaler.min.size())},
            {"max", std::vector<double>(scaler.max.data(), scaler.max.data() + scaler.max.size())}};
}

MinMaxScaler scaler_from_json(const nlohmann::json& doc) {
    try {
        const auto lo = doc.at("min").get<std::vector<double>>();
        const auto hi = doc.at("max").get<std::vector<double>>();
        if (lo.size() != hi.size()) throw ValidationError("scaler min/max length mismatch");
        MinMaxScaler s;
        s.min = Eigen::Map<const Eigen::RowVectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
        s.max = Eigen::Map<const Eigen::RowVectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed scaler document: ") + e.what());
    }
}

}  // namespace flowagg
