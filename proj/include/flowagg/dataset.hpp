#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowagg/flow_features.hpp"

namespace flowagg {

// Labeled feature matrix: one sample per row, labels index class_names.
struct Dataset {
    std::vector<std::string> feature_names;
    Eigen::MatrixXd features;
    std::vector<int> labels;
    std::vector<std::string> class_names;

    std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }
    std::size_t num_classes() const { return class_names.size(); }

    std::optional<std::size_t> column(std::string_view name) const;
    std::vector<std::size_t> class_counts() const;

    Dataset select_columns(std::span<const std::size_t> columns) const;
    Dataset select_columns(std::span<const std::string> names) const;
    Dataset drop_columns(std::span<const std::string> names) const;
    Dataset select_rows(std::span<const std::size_t> rows) const;

    // Shape and label consistency; throws ValidationError.
    void validate() const;
};

// Builds a dataset from flow rows. With `with_aggregation` the matrix gets
// the num_flows and src_ports_delta columns after the 34 flow features and
// every row must have been aggregated. `class_names` fixes the label order;
// when empty, "benign" comes first and other labels follow in order of
// first appearance. A row whose label is not in `class_names` is an error.
Dataset build_dataset(std::span<const FlowFeatureVector> rows, bool with_aggregation,
                      std::vector<std::string> class_names = {});

// The two aggregation column names.
std::vector<std::string> aggregation_columns();

}  // namespace flowagg
