#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "flowagg/flow_assembly.hpp"
#include "flowagg/flow_features.hpp"
#include "flowagg/packet_capture.hpp"

namespace flowagg {

enum class PortPattern { EphemeralRandom, SequentialIncrement, Fixed };
std::string_view to_string(PortPattern p);
PortPattern parse_port_pattern(std::string_view text);

// How one flow's packets look on the wire.
enum class FlowShape {
    Conversation,  // TCP handshake, data, FIN teardown
    Probe,         // TCP SYN answered by RST|ACK
    Datagram,      // UDP request/response exchange
};
std::string_view to_string(FlowShape s);
FlowShape parse_flow_shape(std::string_view text);

inline constexpr std::uint16_t kEphemeralLow = 32768;
inline constexpr std::uint16_t kEphemeralHigh = 60999;

// One traffic class: a set of initiating hosts with shared per-flow
// distributions.
struct TrafficClass {
    std::string label;
    std::size_t sources = 1;
    std::size_t flows_per_source_min = 1;
    std::size_t flows_per_source_max = 1;
    double flow_rate = 0.05;  // flow starts per second per source (Poisson)
    PortPattern port_pattern = PortPattern::EphemeralRandom;
    std::uint16_t port_step = 1;
    FlowShape shape = FlowShape::Conversation;
    std::uint16_t service_port = 80;  // Probe shape scans upward from here
    std::size_t servers = 20;         // destination pool size
    // Data packets per flow, uniform integer range.
    std::size_t data_packets_min = 2;
    std::size_t data_packets_max = 12;
    // Data packet IP total length, normal then clamped to [64, 1500].
    double fwd_size_mean = 300.0;
    double fwd_size_std = 150.0;
    double bwd_size_mean = 800.0;
    double bwd_size_std = 400.0;
    double iat_mean = 0.2;  // exponential gap between successive packets, seconds
};

// A single hand-placed flow (used for small illustrative captures).
struct ScriptedFlow {
    Ipv4Address src;
    Ipv4Address dst;
    std::uint16_t src_port = 0;  // 0 picks a random ephemeral port
    std::uint16_t dst_port = 80;
    double start = 0.0;  // seconds from scenario start
    std::string label{kBenignLabel};
};

struct ScenarioSpec {
    std::uint64_t seed = 0;
    double duration = 600.0;
    double start_epoch = 1499000000.0;
    std::vector<TrafficClass> classes;
    std::vector<ScriptedFlow> scripted;

    // Throws ValidationError on an infeasible spec.
    void validate() const;
};

// Ground truth for one generated flow.
struct LabelEntry {
    Endpoint initiator;
    Endpoint responder;
    Protocol protocol = Protocol::Tcp;
    double start_time = 0.0;
    std::string label;
};

struct SyntheticCapture {
    std::vector<PacketRecord> packets;  // timestamp order
    std::vector<LabelEntry> manifest;   // one entry per flow, in generation order
};

// Deterministic in spec.seed. Timestamps are microsecond-quantized so they
// survive a pcap round trip exactly.
SyntheticCapture generate(const ScenarioSpec& spec);

// Shared per-flow distributions of benign traffic.
TrafficClass benign_class(std::size_t flows);
// Flow-level copy of benign traffic issued from a few hosts, many flows each,
// with sequentially increasing source ports.
TrafficClass mimicking_class(std::string label, std::size_t flows, std::size_t min_flows_per_source,
                             std::size_t max_flows_per_source, std::uint16_t port_step);
TrafficClass portscan_class(std::size_t flows);
TrafficClass flood_class(std::size_t flows);

struct ScenarioScale {
    std::size_t benign_flows = 2000;
    std::size_t attack_flows = 500;  // per attack class
};

// Built-in scenarios: "benign", "mimicking", "five_class", "four_hosts".
std::vector<std::string> builtin_scenarios();
ScenarioSpec builtin_scenario(std::string_view name, std::uint64_t seed, const ScenarioScale& scale = {});

// Scenario description in the flat `key = value` config format:
//   [scenario] seed, duration, start_epoch
//   [class.<label>] one section per TrafficClass, keys named like its fields
ScenarioSpec load_scenario_file(const std::filesystem::path& path);

struct PcapWriteOptions {
    std::uint32_t snaplen = 128;  // frames are cut after this many bytes
};

// Classic little-endian pcap with Ethernet framing and microsecond
// timestamps.
std::vector<std::uint8_t> encode_pcap(std::span<const PacketRecord> packets,
                                      const PcapWriteOptions& options = {});
void write_pcap(std::span<const PacketRecord> packets, const std::filesystem::path& path,
                const PcapWriteOptions& options = {});

// Label manifest CSV:
// initiator_ip,initiator_port,responder_ip,responder_port,protocol,start_time,label
void write_label_manifest(std::ostream& out, std::span<const LabelEntry> entries);
void write_label_manifest(const std::filesystem::path& path, std::span<const LabelEntry> entries);
std::vector<LabelEntry> read_label_manifest(const std::filesystem::path& path);

// Sets each row's label from the manifest entry with the same endpoints,
// protocol and start time (to the microsecond). Returns the number of rows
// without a matching entry; those keep their label.
std::size_t apply_labels(std::span<FlowFeatureVector> rows, std::span<const LabelEntry> manifest);

}  // namespace flowagg
