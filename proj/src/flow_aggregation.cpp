#include "flowagg/flow_aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "flowagg/errors.hpp"

namespace flowagg {

double ports_delta(std::span<const std::uint16_t> ports) {
    if (ports.empty()) throw std::domain_error("ports_delta of an empty port list");
    std::vector<std::uint16_t> sorted(ports.begin(), ports.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.size() == 1) return 0.0;

    std::int64_t total = 0;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        total += std::abs(static_cast<std::int64_t>(sorted[i + 1]) - sorted[i]);
    return static_cast<double>(total) / static_cast<double>(sorted.size() - 1);
}

std::vector<Bundle> bundle_flows(std::span<const FlowOrigin> flows, BundleWindow window) {
    if (window && !(*window > 0.0))
        throw ValidationError("bundle window must be > 0 seconds");

    std::vector<Bundle> bundles;
    std::vector<std::vector<std::uint16_t>> ports;
    std::map<std::pair<std::uint32_t, std::int64_t>, std::size_t> index;

    for (std::size_t i = 0; i < flows.size(); ++i) {
        const auto& f = flows[i];
        const std::int64_t w =
            window ? static_cast<std::int64_t>(std::floor(f.start_time / *window)) : 0;
        auto [it, inserted] = index.try_emplace({f.initiator.ip.value, w}, bundles.size());
        if (inserted) {
            bundles.push_back(Bundle{f.initiator.ip, w, {}, 0, 0.0});
            ports.emplace_back();
        }
        bundles[it->second].member_flows.push_back(i);
        ports[it->second].push_back(f.initiator.port);
    }
    for (std::size_t b = 0; b < bundles.size(); ++b) {
        bundles[b].num_flows = bundles[b].member_flows.size();
        bundles[b].src_ports_delta = ports_delta(ports[b]);
    }
    return bundles;
}

std::vector<Bundle> bundle_flows(std::span<const BiFlow> flows, BundleWindow window) {
    std::vector<FlowOrigin> origins;
    origins.reserve(flows.size());
    for (const auto& f : flows) origins.push_back({f.initiator, f.start_time});
    return bundle_flows(origins, window);
}

std::vector<Bundle> bundle_flows(std::span<const FlowFeatureVector> rows, BundleWindow window) {
    std::vector<FlowOrigin> origins;
    origins.reserve(rows.size());
    for (const auto& r : rows) origins.push_back({r.initiator, r.start_time});
    return bundle_flows(origins, window);
}

std::vector<FlowFeatureVector> propagate(std::span<const Bundle> bundles,
                                         std::vector<FlowFeatureVector> rows) {
    std::vector<bool> seen(rows.size(), false);
    for (const auto& bundle : bundles) {
        for (const std::size_t m : bundle.member_flows) {
            if (m >= rows.size())
                throw std::logic_error("bundle member " + std::to_string(m) + " has no feature row");
            if (seen[m])
                throw std::logic_error("flow row " + std::to_string(m) + " belongs to two bundles");
            seen[m] = true;
            rows[m].num_flows = static_cast<double>(bundle.num_flows);
            rows[m].src_ports_delta = bundle.src_ports_delta;
        }
    }
    const auto orphan = std::find(seen.begin(), seen.end(), false);
    if (orphan != seen.end())
        throw std::logic_error("flow row " + std::to_string(orphan - seen.begin()) +
                               " belongs to no bundle");
    return rows;
}

std::vector<FlowFeatureVector> aggregate(std::vector<FlowFeatureVector> rows, BundleWindow window) {
    const auto bundles = bundle_flows(std::span<const FlowFeatureVector>(rows), window);
    return propagate(bundles, std::move(rows));
}

}  // namespace flowagg
