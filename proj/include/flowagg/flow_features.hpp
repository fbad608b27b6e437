#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowagg/flow_assembly.hpp"

namespace flowagg {

inline constexpr std::size_t kStatsPerDirection = 17;
inline constexpr std::size_t kFlowFeatureCount = 2 * kStatsPerDirection;

// Column order within one direction. The fwd block comes first, then bwd.
enum class DirectionStat : std::size_t {
    PktCount,
    ByteCount,
    PktLenMean,
    PktLenStd,
    PktLenMin,
    PktLenMax,
    IatMean,
    IatStd,
    IatMin,
    IatMax,
    TimeFromFirstMean,
    FlagSynCount,
    FlagAckCount,
    FlagFinCount,
    FlagRstCount,
    FlagPshCount,
    FlagUrgCount,
};

enum class Direction { Fwd, Bwd };

constexpr std::size_t feature_index(Direction d, DirectionStat s) {
    return (d == Direction::Fwd ? 0 : kStatsPerDirection) + static_cast<std::size_t>(s);
}

// "fwd_pkt_count" ... "bwd_flag_urg_count".
const std::array<std::string, kFlowFeatureCount>& flow_feature_names();

inline constexpr std::string_view kNumFlowsColumn = "num_flows";
inline constexpr std::string_view kSrcPortsDeltaColumn = "src_ports_delta";
inline constexpr std::string_view kBenignLabel = "benign";

struct FlowFeatureVector {
    FlowKey key;
    Endpoint initiator;
    double start_time = 0.0;
    std::string label{kBenignLabel};

    std::array<double, kFlowFeatureCount> values{};
    std::optional<double> num_flows;        // set by aggregation
    std::optional<double> src_ports_delta;  // set by aggregation

    double operator[](std::size_t i) const { return values[i]; }
    double get(Direction d, DirectionStat s) const { return values[feature_index(d, s)]; }
    Endpoint responder() const {
        return initiator == key.endpoint_a ? key.endpoint_b : key.endpoint_a;
    }
    bool aggregated() const { return num_flows.has_value() && src_ports_delta.has_value(); }
};

// Computes the 34 per-flow statistics. Standard deviations are population
// (divide by n). A direction without packets has all statistics 0; one with a
// single packet has IAT statistics and time-from-first mean 0.
FlowFeatureVector extract_features(const BiFlow& flow);

std::vector<FlowFeatureVector> extract_all(std::span<const BiFlow> flows);

// Flow CSV. Columns: the 34 features, num_flows, src_ports_delta, label,
// then flow metadata (initiator_ip, initiator_port, responder_ip,
// responder_port, protocol, start_time) needed to re-run aggregation.
// Feature values are written with 6 decimals; absent aggregation slots are
// empty fields.
std::vector<std::string> flow_csv_header();
void write_flow_csv(std::ostream& out, std::span<const FlowFeatureVector> rows);
void write_flow_csv(const std::filesystem::path& path, std::span<const FlowFeatureVector> rows);
std::vector<FlowFeatureVector> read_flow_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<FlowFeatureVector> read_flow_csv(const std::filesystem::path& path);

}  // namespace flowagg
