#include "flowagg/zero_day.hpp"

#include <fstream>

#include "flowagg/errors.hpp"

namespace flowagg {

void ThresholdPolicy::validate() const {
    if (thresholds.empty()) throw ValidationError("at least one threshold is required");
    for (double t : thresholds)
        if (!(t > 0.0 && t < 1.0))
            throw ValidationError("threshold " + std::to_string(t) + " is outside (0, 1)");
}

Eigen::VectorXd ZeroDayModel::errors(const Eigen::MatrixXd& raw_features) const {
    return reconstruction_errors(autoencoder, scaler.transform(raw_features));
}

Eigen::VectorXd ZeroDayModel::errors(const Dataset& data) const {
    return errors(data.select_columns(feature_names).features);
}

ZeroDayModel fit_benign(const Dataset& benign, const AutoencoderSpec& spec) {
    if (benign.rows() == 0) throw ValidationError("no benign rows to train on");
    if (benign.cols() == 0) throw ValidationError("no feature columns");
    if (!benign.features.allFinite()) throw ValidationError("benign features contain non-finite values");

    ZeroDayModel m;
    m.feature_names = benign.feature_names;
    m.scaler = MinMaxScaler::fit(benign.features);
    const std::size_t inputs = benign.cols();
    const std::size_t hidden = spec.hidden.value_or((inputs + 1) / 2);
    TrainingConfig cfg = spec.training;
    cfg.loss = Loss::MSE;
    MlpModel init = make_mlp({inputs, hidden, inputs}, spec.hidden_activation,
                             spec.output_activation, cfg.seed);
    const Eigen::MatrixXd scaled = m.scaler.transform(benign.features);
    m.autoencoder = train(std::move(init), scaled, scaled, cfg).model;
    return m;
}

DetectionReport detect_from_errors(std::span<const double> errors, const ThresholdPolicy& policy,
                                   SampleKind kind) {
    policy.validate();
    DetectionReport report{kind, {}};
    for (double t : policy.thresholds) {
        ThresholdOutcome o{t, 0, errors.size(), 0.0};
        for (double e : errors) o.flagged += exceeds_threshold(e, t);
        if (o.total > 0) {
            const auto hits = kind == SampleKind::Attack ? o.flagged : o.total - o.flagged;
            o.accuracy = static_cast<double>(hits) / static_cast<double>(o.total);
        }
        report.outcomes.push_back(o);
    }
    return report;
}

DetectionReport detect(const ZeroDayModel& model, const Dataset& samples,
                       const ThresholdPolicy& policy, SampleKind kind) {
    const Eigen::VectorXd e = model.errors(samples);
    return detect_from_errors(std::span<const double>(e.data(), static_cast<std::size_t>(e.size())),
                              policy, kind);
}

nlohmann::json to_json(const ZeroDayModel& model) {
    return {
        {"format", "flowagg.zeroday"},
        {"version", kModelFormatVersion},
        {"features", model.feature_names},
        {"scaler", to_json(model.scaler)},
        {"model", to_json(model.autoencoder)},
    };
}

ZeroDayModel zero_day_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("format") != "flowagg.zeroday")
            throw ValidationError("document is not a flowagg zero-day model");
        if (doc.at("version").get<int>() != kModelFormatVersion)
            throw ValidationError("unsupported zero-day model version");
        ZeroDayModel m;
        m.feature_names = doc.at("features").get<std::vector<std::string>>();
        m.scaler = scaler_from_json(doc.at("scaler"));
        m.autoencoder = mlp_from_json(doc.at("model"));
        if (m.scaler.width() != m.feature_names.size() ||
            m.autoencoder.input_size() != m.feature_names.size() ||
            m.autoencoder.output_size() != m.feature_names.size())
            throw ValidationError("zero-day model schema is inconsistent");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed zero-day model: ") + e.what());
    }
}

void save_zero_day(const ZeroDayModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << to_json(model).dump(1) << '\n';
}

ZeroDayModel load_zero_day(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return zero_day_from_json(doc);
}

nlohmann::json to_json(const DetectionReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& o : report.outcomes)
        rows.push_back({{"threshold", o.threshold},
                        {"flagged", o.flagged},
                        {"total", o.total},
                        {"accuracy", o.accuracy}});
    return {{"kind", report.kind == SampleKind::Attack ? "attack" : "benign"}, {"thresholds", rows}};
}

}  // namespace flowagg
