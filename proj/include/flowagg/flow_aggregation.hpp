#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flowagg/flow_assembly.hpp"
#include "flowagg/flow_features.hpp"

namespace flowagg {

// A group of flows started by the same host within one tumbling window.
struct Bundle {
    Ipv4Address initiator_ip;
    std::int64_t window_index = 0;  // 0 when the window is unbounded
    std::vector<std::size_t> member_flows;  // indices into the bundled flow list
    std::size_t num_flows = 0;
    double src_ports_delta = 0.0;
};

// Bundling window length in seconds; nullopt means one window for the whole
// capture.
using BundleWindow = std::optional<double>;

// The fields of a flow that bundling looks at.
struct FlowOrigin {
    Endpoint initiator;
    double start_time = 0.0;
};

// Mean absolute difference between consecutive ports after sorting
// ascending. A single port yields 0. Throws std::domain_error on an empty
// list.
double ports_delta(std::span<const std::uint16_t> ports);

// Assigns every flow to the bundle keyed by (initiator IP,
// floor(start_time / window)). Bundles are ordered by their first member.
// The port list of a bundle is the initiator port of every member,
// duplicates kept. Throws ValidationError when window <= 0.
std::vector<Bundle> bundle_flows(std::span<const FlowOrigin> flows, BundleWindow window = std::nullopt);
std::vector<Bundle> bundle_flows(std::span<const BiFlow> flows, BundleWindow window = std::nullopt);
std::vector<Bundle> bundle_flows(std::span<const FlowFeatureVector> rows,
                                 BundleWindow window = std::nullopt);

// Copies each bundle's num_flows and src_ports_delta onto its member rows.
// Member indices refer to positions in `rows`. Throws std::logic_error when a
// row belongs to no bundle or to more than one.
std::vector<FlowFeatureVector> propagate(std::span<const Bundle> bundles,
                                         std::vector<FlowFeatureVector> rows);

// bundle_flows followed by propagate.
std::vector<FlowFeatureVector> aggregate(std::vector<FlowFeatureVector> rows,
                                         BundleWindow window = std::nullopt);

}  // namespace flowagg
