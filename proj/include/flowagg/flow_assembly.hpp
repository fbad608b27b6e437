#pragma once

#include <compare>
#include <optional>
#include <span>
#include <vector>

#include "flowagg/packet_capture.hpp"

namespace flowagg {

struct Endpoint {
    Ipv4Address ip;
    std::uint16_t port = 0;

    auto operator<=>(const Endpoint&) const = default;
};

// Unordered 5-tuple. endpoint_a <= endpoint_b, so both directions of a
// conversation produce the same key.
struct FlowKey {
    Endpoint endpoint_a;
    Endpoint endpoint_b;
    Protocol protocol = Protocol::Tcp;

    static FlowKey from_packet(const PacketRecord& packet);
    static FlowKey from_endpoints(Endpoint x, Endpoint y, Protocol protocol);

    auto operator<=>(const FlowKey&) const = default;
};

struct BiFlow {
    FlowKey key;
    Endpoint initiator;  // source of the first packet
    std::vector<PacketRecord> fwd_packets;  // initiator -> responder
    std::vector<PacketRecord> bwd_packets;  // responder -> initiator
    double start_time = 0.0;
    double end_time = 0.0;

    Endpoint responder() const {
        return initiator == key.endpoint_a ? key.endpoint_b : key.endpoint_a;
    }
    std::size_t packet_count() const { return fwd_packets.size() + bwd_packets.size(); }
};

struct FlowTimeouts {
    double idle_timeout_s = 120.0;
    std::optional<double> active_timeout_s = 1800.0;  // nullopt disables

    void validate() const;
};

// Groups packets into bidirectional flows. Packets are stable-sorted by
// timestamp first. A packet starts a new flow for its key when the gap since
// the key's previous packet exceeds the idle timeout, when the current flow
// is older than the active timeout, or when the current flow was closed by a
// RST or by FINs in both directions plus the closing ACK. Flows are returned
// in order of their first packet.
std::vector<BiFlow> assemble_flows(std::span<const PacketRecord> packets,
                                   const FlowTimeouts& timeouts = {});

}  // namespace flowagg
