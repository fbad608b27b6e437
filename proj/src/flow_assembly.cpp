#include "flowagg/flow_assembly.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "flowagg/errors.hpp"

namespace flowagg {

FlowKey FlowKey::from_endpoints(Endpoint x, Endpoint y, Protocol protocol) {
    if (y < x) std::swap(x, y);
    return FlowKey{x, y, protocol};
}

FlowKey FlowKey::from_packet(const PacketRecord& packet) {
    return from_endpoints({packet.src_ip, packet.src_port}, {packet.dst_ip, packet.dst_port},
                          packet.protocol);
}

void FlowTimeouts::validate() const {
    if (!(idle_timeout_s > 0.0)) throw ValidationError("flow.idle_timeout_s must be > 0");
    if (active_timeout_s && !(*active_timeout_s > idle_timeout_s))
        throw ValidationError("flow.active_timeout_s must exceed flow.idle_timeout_s");
}

namespace {

enum class CloseState { Open, FinBoth, Closed };

struct OpenFlow {
    std::size_t index;  // position in the output list
    double last_seen;
    bool fin_fwd = false;
    bool fin_bwd = false;
    CloseState state = CloseState::Open;
};

}  // namespace

std::vector<BiFlow> assemble_flows(std::span<const PacketRecord> packets,
                                   const FlowTimeouts& timeouts) {
    timeouts.validate();

    std::vector<std::size_t> order(packets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return packets[a].timestamp < packets[b].timestamp;
    });

    std::vector<BiFlow> flows;
    std::map<FlowKey, OpenFlow> active;

    for (const std::size_t i : order) {
        const PacketRecord& packet = packets[i];
        const FlowKey key = FlowKey::from_packet(packet);
        auto it = active.find(key);

        bool start_new = it == active.end();
        if (!start_new) {
            const OpenFlow& current = it->second;
            const BiFlow& flow = flows[current.index];
            const bool idle = packet.timestamp - current.last_seen > timeouts.idle_timeout_s;
            const bool aged = timeouts.active_timeout_s &&
                              packet.timestamp - flow.start_time > *timeouts.active_timeout_s;
            const bool closed = current.state == CloseState::Closed ||
                                (current.state == CloseState::FinBoth &&
                                 packet.has_flag(tcp_flag::kSyn));
            start_new = idle || aged || closed;
        }

        if (start_new) {
            BiFlow flow;
            flow.key = key;
            flow.initiator = Endpoint{packet.src_ip, packet.src_port};
            flow.start_time = packet.timestamp;
            flow.end_time = packet.timestamp;
            flows.push_back(std::move(flow));
            OpenFlow state{flows.size() - 1, packet.timestamp};
            it = active.insert_or_assign(key, state).first;
        }

        OpenFlow& state = it->second;
        BiFlow& flow = flows[state.index];
        const bool forward = Endpoint{packet.src_ip, packet.src_port} == flow.initiator;
        (forward ? flow.fwd_packets : flow.bwd_packets).push_back(packet);
        flow.end_time = std::max(flow.end_time, packet.timestamp);
        state.last_seen = packet.timestamp;

        if (packet.protocol != Protocol::Tcp) continue;
        if (state.state == CloseState::FinBoth) {
            // The packet after FINs in both directions (normally the last ACK)
            // completes the teardown.
            state.state = CloseState::Closed;
        } else if (packet.has_flag(tcp_flag::kRst)) {
            state.state = CloseState::Closed;
        } else if (packet.has_flag(tcp_flag::kFin)) {
            (forward ? state.fin_fwd : state.fin_bwd) = true;
            if (state.fin_fwd && state.fin_bwd) state.state = CloseState::FinBoth;
        }
    }
    return flows;
}

}  // namespace flowagg
