#include "flowagg/dataset.hpp"

#include <algorithm>
#include <map>

#include "flowagg/errors.hpp"

namespace flowagg {

std::optional<std::size_t> Dataset::column(std::string_view name) const {
    const auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - feature_names.begin());
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(class_names.size(), 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    return counts;
}

Dataset Dataset::select_columns(std::span<const std::size_t> columns) const {
    Dataset out;
    out.labels = labels;
    out.class_names = class_names;
    out.features.resize(features.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] >= cols()) throw ValidationError("column index out of range");
        out.feature_names.push_back(feature_names[columns[i]]);
        out.features.col(static_cast<Eigen::Index>(i)) =
            features.col(static_cast<Eigen::Index>(columns[i]));
    }
    return out;
}

Dataset Dataset::select_columns(std::span<const std::string> names) const {
    std::vector<std::size_t> idx;
    for (const auto& n : names) {
        const auto c = column(n);
        if (!c) throw ValidationError("dataset has no feature column '" + n + "'");
        idx.push_back(*c);
    }
    return select_columns(idx);
}

Dataset Dataset::drop_columns(std::span<const std::string> names) const {
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < cols(); ++c)
        if (std::find(names.begin(), names.end(), feature_names[c]) == names.end())
            keep.push_back(c);
    return select_columns(keep);
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows_to_keep) const {
    Dataset out;
    out.feature_names = feature_names;
    out.class_names = class_names;
    out.features.resize(static_cast<Eigen::Index>(rows_to_keep.size()), features.cols());
    for (std::size_t i = 0; i < rows_to_keep.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) =
            features.row(static_cast<Eigen::Index>(rows_to_keep[i]));
        out.labels.push_back(labels[rows_to_keep[i]]);
    }
    return out;
}

void Dataset::validate() const {
    if (feature_names.size() != cols())
        throw ValidationError("feature name count does not match matrix width");
    if (labels.size() != rows()) throw ValidationError("label count does not match row count");
    for (int l : labels)
        if (l < 0 || static_cast<std::size_t>(l) >= class_names.size())
            throw ValidationError("label index out of range");
    if (!features.allFinite()) throw ValidationError("feature matrix contains non-finite values");
}

std::vector<std::string> aggregation_columns() {
    return {std::string(kNumFlowsColumn), std::string(kSrcPortsDeltaColumn)};
}

Dataset build_dataset(std::span<const FlowFeatureVector> rows, bool with_aggregation,
                      std::vector<std::string> class_names) {
    if (class_names.empty()) {
        const bool has_benign = std::any_of(rows.begin(), rows.end(),
                                            [](const auto& r) { return r.label == kBenignLabel; });
        if (has_benign) class_names.emplace_back(kBenignLabel);
        for (const auto& r : rows)
            if (std::find(class_names.begin(), class_names.end(), r.label) == class_names.end())
                class_names.push_back(r.label);
    }
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < class_names.size(); ++i)
        if (!index.emplace(class_names[i], static_cast<int>(i)).second)
            throw ValidationError("duplicate class name '" + class_names[i] + "'");

    Dataset data;
    const auto& names = flow_feature_names();
    data.feature_names.assign(names.begin(), names.end());
    if (with_aggregation)
        for (auto& c : aggregation_columns()) data.feature_names.push_back(c);
    data.class_names = std::move(class_names);
    data.features.resize(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(data.feature_names.size()));
    data.labels.reserve(rows.size());

    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const auto it = index.find(row.label);
        if (it == index.end())
            throw ValidationError("row " + std::to_string(r) + " has unexpected label '" +
                                  row.label + "'");
        data.labels.push_back(it->second);
        const auto ri = static_cast<Eigen::Index>(r);
        for (std::size_t c = 0; c < kFlowFeatureCount; ++c)
            data.features(ri, static_cast<Eigen::Index>(c)) = row.values[c];
        if (with_aggregation) {
            if (!row.aggregated())
                throw ValidationError("row " + std::to_string(r) +
                                      " lacks aggregation features; run aggregation first");
            data.features(ri, kFlowFeatureCount) = *row.num_flows;
            data.features(ri, kFlowFeatureCount + 1) = *row.src_ports_delta;
        }
    }
    data.validate();
    return data;
}

}  // namespace flowagg
