#include "flowagg/classifier.hpp"

#include <fstream>

#include "flowagg/errors.hpp"

namespace flowagg {

std::vector<int> Classifier::predict(const Eigen::MatrixXd& raw_features) const {
    return predict_classes(model, scaler.transform(raw_features));
}

std::vector<int> Classifier::predict(const Dataset& data) const {
    return predict(data.select_columns(feature_names).features);
}

Classifier fit_classifier(const Dataset& data, const ModelSpec& spec, std::uint64_t seed) {
    data.validate();
    if (data.num_classes() < 2) throw ValidationError("classification needs at least two classes");
    Classifier c;
    c.feature_names = data.feature_names;
    c.class_names = data.class_names;
    c.scaler = MinMaxScaler::fit(data.features);

    std::vector<std::size_t> sizes{data.cols()};
    sizes.insert(sizes.end(), spec.hidden_layers.begin(), spec.hidden_layers.end());
    sizes.push_back(data.num_classes());
    TrainingConfig cfg = spec.training;
    cfg.seed = seed;
    MlpModel init = make_mlp(sizes, spec.hidden_activation, Activation::Softmax, seed);
    c.model = train_classifier(std::move(init), c.scaler.transform(data.features), data.labels, cfg)
                  .model;
    return c;
}

nlohmann::json to_json(const Classifier& c) {
    return {
        {"format", "flowagg.classifier"},
        {"version", kModelFormatVersion},
        {"features", c.feature_names},
        {"classes", c.class_names},
        {"scaler", to_json(c.scaler)},
        {"model", to_json(c.model)},
    };
}

Classifier classifier_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("format") != "flowagg.classifier")
            throw ValidationError("document is not a flowagg classifier");
        if (doc.at("version").get<int>() != kModelFormatVersion)
            throw ValidationError("unsupported classifier version");
        Classifier c;
        c.feature_names = doc.at("features").get<std::vector<std::string>>();
        c.class_names = doc.at("classes").get<std::vector<std::string>>();
        c.scaler = scaler_from_json(doc.at("scaler"));
        c.model = mlp_from_json(doc.at("model"));
        if (c.scaler.width() != c.feature_names.size() || c.model.input_size() != c.feature_names.size() ||
            c.model.output_size() != c.class_names.size())
            throw ValidationError("classifier schema is inconsistent");
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed classifier document: ") + e.what());
    }
}

void save_classifier(const Classifier& c, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << to_json(c).dump(1) << '\n';
}

Classifier load_classifier(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return classifier_from_json(doc);
}

}  // namespace flowagg
