#include "flowagg/synth_traffic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "flowagg/errors.hpp"
#include "flowagg/ini.hpp"
#include "flowagg/random.hpp"
#include "text_util.hpp"

namespace flowagg {

std::string_view to_string(PortPattern p) {
    switch (p) {
        case PortPattern::EphemeralRandom: return "ephemeral-random";
        case PortPattern::SequentialIncrement: return "sequential-increment";
        case PortPattern::Fixed: return "fixed";
    }
    return "?";
}

PortPattern parse_port_pattern(std::string_view text) {
    for (auto p : {PortPattern::EphemeralRandom, PortPattern::SequentialIncrement, PortPattern::Fixed})
        if (to_string(p) == text) return p;
    throw ValidationError("unknown port pattern '" + std::string(text) + "'");
}

std::string_view to_string(FlowShape s) {
    switch (s) {
        case FlowShape::Conversation: return "conversation";
        case FlowShape::Probe: return "probe";
        case FlowShape::Datagram: return "datagram";
    }
    return "?";
}

FlowShape parse_flow_shape(std::string_view text) {
    for (auto s : {FlowShape::Conversation, FlowShape::Probe, FlowShape::Datagram})
        if (to_string(s) == text) return s;
    throw ValidationError("unknown flow shape '" + std::string(text) + "'");
}

void ScenarioSpec::validate() const {
    if (!(duration > 0.0)) throw ValidationError("scenario duration must be > 0");
    if (!(start_epoch >= 0.0) || start_epoch > 4.0e9)
        throw ValidationError("scenario start_epoch must fit a pcap timestamp");
    if (classes.empty() && scripted.empty())
        throw ValidationError("scenario has no traffic classes and no scripted flows");
    if (classes.size() > 200) throw ValidationError("too many traffic classes");
    for (const auto& c : classes) {
        const std::string where = "class '" + c.label + "': ";
        if (c.label.empty() || c.label.find_first_of(",\n\"") != std::string::npos)
            throw ValidationError("traffic class label must be non-empty and CSV-safe");
        if (c.sources == 0) throw ValidationError(where + "zero hosts");
        if (c.sources > 250 * 256) throw ValidationError(where + "too many hosts");
        if (c.flows_per_source_min == 0 || c.flows_per_source_max < c.flows_per_source_min)
            throw ValidationError(where + "invalid flows-per-source range");
        if (!(c.flow_rate > 0.0)) throw ValidationError(where + "flow rate must be > 0");
        if (!(c.iat_mean > 0.0)) throw ValidationError(where + "inter-arrival mean must be > 0");
        if (c.servers == 0 || c.servers > 250) throw ValidationError(where + "servers must be in 1..250");
        if (c.data_packets_max < c.data_packets_min)
            throw ValidationError(where + "invalid packets-per-flow range");
        for (double v : {c.fwd_size_mean, c.fwd_size_std, c.bwd_size_mean, c.bwd_size_std})
            if (!std::isfinite(v) || v < 0.0)
                throw ValidationError(where + "packet size parameters must be finite and >= 0");
        if (c.port_pattern == PortPattern::SequentialIncrement) {
            if (c.port_step == 0) throw ValidationError(where + "port step must be >= 1");
            const std::size_t span = static_cast<std::size_t>(c.port_step) * (c.flows_per_source_max - 1);
            if (kEphemeralLow + span > 65535)
                throw ValidationError(where + "sequential ports overflow the port range");
        }
        if (c.port_pattern == PortPattern::Fixed && c.shape != FlowShape::Probe)
            throw ValidationError(where + "a fixed source port needs the probe shape");
        if (c.port_pattern == PortPattern::EphemeralRandom &&
            c.flows_per_source_max > kEphemeralHigh - kEphemeralLow + 1u)
            throw ValidationError(where + "more flows per source than ephemeral ports");
        if (c.shape == FlowShape::Probe &&
            c.service_port + c.flows_per_source_max > 65536u)
            throw ValidationError(where + "probe port range overflows");
    }
    for (const auto& s : scripted)
        if (!(s.start >= 0.0)) throw ValidationError("scripted flow start must be >= 0");
}

namespace {

double quantize(double seconds) {
    double sec = std::floor(seconds);
    long long usec = std::llround((seconds - sec) * 1e6);
    if (usec >= 1000000) {
        sec += 1.0;
        usec -= 1000000;
    }
    return pcap_timestamp(static_cast<std::uint32_t>(sec), static_cast<std::uint32_t>(usec));
}

std::uint16_t draw_size(Rng& rng, double mean, double stddev, double lo) {
    const double v = stddev > 0.0 ? rng.normal(mean, stddev) : mean;
    return static_cast<std::uint16_t>(std::lround(std::clamp(v, lo, 1500.0)));
}

class Generator {
public:
    explicit Generator(const ScenarioSpec& spec) : spec_(spec), rng_(spec.seed) {}

    SyntheticCapture run() {
        for (std::size_t c = 0; c < spec_.classes.size(); ++c) emit_class(c);
        for (const auto& s : spec_.scripted) emit_scripted(s);
        std::stable_sort(out_.packets.begin(), out_.packets.end(),
                         [](const PacketRecord& a, const PacketRecord& b) { return a.timestamp < b.timestamp; });
        return std::move(out_);
    }

private:
    std::uint16_t fresh_port(Ipv4Address host) {
        auto& used = used_ports_[host.value];
        while (true) {
            const auto p = static_cast<std::uint16_t>(rng_.range(kEphemeralLow, kEphemeralHigh));
            if (used.insert(p).second) return p;
        }
    }

    void emit_class(std::size_t c) {
        const TrafficClass& cls = spec_.classes[c];
        for (std::size_t h = 0; h < cls.sources; ++h) {
            const auto src = Ipv4Address::from_octets(10, static_cast<std::uint8_t>(c + 1),
                                                      static_cast<std::uint8_t>(h / 250),
                                                      static_cast<std::uint8_t>(h % 250 + 1));
            const auto flows = static_cast<std::size_t>(
                rng_.range(static_cast<std::int64_t>(cls.flows_per_source_min),
                           static_cast<std::int64_t>(cls.flows_per_source_max)));

            std::vector<std::uint16_t> ports(flows);
            switch (cls.port_pattern) {
                case PortPattern::EphemeralRandom:
                    for (auto& p : ports) p = fresh_port(src);
                    break;
                case PortPattern::SequentialIncrement: {
                    const std::int64_t span = static_cast<std::int64_t>(cls.port_step) *
                                              static_cast<std::int64_t>(flows - 1);
                    const std::int64_t hi = std::max<std::int64_t>(kEphemeralLow, kEphemeralHigh - span);
                    const auto base = rng_.range(kEphemeralLow, hi);
                    for (std::size_t i = 0; i < flows; ++i)
                        ports[i] = static_cast<std::uint16_t>(base + static_cast<std::int64_t>(i) * cls.port_step);
                    break;
                }
                case PortPattern::Fixed:
                    std::fill(ports.begin(), ports.end(), fresh_port(src));
                    break;
            }

            double t = rng_.uniform(0.0, spec_.duration);
            for (std::size_t i = 0; i < flows; ++i) {
                if (i > 0) t += rng_.exponential(1.0 / cls.flow_rate);
                const auto server = Ipv4Address::from_octets(
                    192, 168, 1, static_cast<std::uint8_t>(rng_.below(cls.servers) + 1));
                const std::uint16_t dport = cls.shape == FlowShape::Probe
                                                ? static_cast<std::uint16_t>(cls.service_port + i)
                                                : cls.service_port;
                emit_flow(cls, src, ports[i], server, dport, t, cls.label);
            }
        }
    }

    void emit_scripted(const ScriptedFlow& s) {
        TrafficClass cls = benign_class(1);
        const std::uint16_t sport = s.src_port != 0 ? s.src_port : fresh_port(s.src);
        emit_flow(cls, s.src, sport, s.dst, s.dst_port, s.start, s.label);
    }

    void emit_flow(const TrafficClass& cls, Ipv4Address src, std::uint16_t sport, Ipv4Address dst,
                   std::uint16_t dport, double start, const std::string& label) {
        const Protocol proto = cls.shape == FlowShape::Datagram ? Protocol::Udp : Protocol::Tcp;
        double t = spec_.start_epoch + start;
        bool first = true;
        double first_ts = 0.0;
        auto add = [&](bool fwd, std::uint16_t length, std::uint8_t flags) {
            if (!first) t += rng_.exponential(cls.iat_mean);
            PacketRecord p;
            p.timestamp = quantize(t);
            p.src_ip = fwd ? src : dst;
            p.dst_ip = fwd ? dst : src;
            p.src_port = fwd ? sport : dport;
            p.dst_port = fwd ? dport : sport;
            p.protocol = proto;
            p.ip_total_length = length;
            p.tcp_flags = flags;
            if (first) first_ts = p.timestamp;
            first = false;
            out_.packets.push_back(p);
        };
        auto data_packets = [&] {
            return static_cast<std::size_t>(rng_.range(static_cast<std::int64_t>(cls.data_packets_min),
                                                       static_cast<std::int64_t>(cls.data_packets_max)));
        };
        using namespace tcp_flag;

        switch (cls.shape) {
            case FlowShape::Conversation: {
                add(true, 60, kSyn);
                add(false, 60, kSyn | kAck);
                add(true, 52, kAck);
                const std::size_t n = data_packets();
                for (std::size_t i = 0; i < n; ++i) {
                    const bool fwd = i == 0 || rng_.uniform() < 0.5;
                    const auto len = fwd ? draw_size(rng_, cls.fwd_size_mean, cls.fwd_size_std, 64)
                                         : draw_size(rng_, cls.bwd_size_mean, cls.bwd_size_std, 64);
                    add(fwd, len, kPsh | kAck);
                }
                add(true, 52, kFin | kAck);
                add(false, 52, kFin | kAck);
                add(true, 52, kAck);
                break;
            }
            case FlowShape::Probe:
                add(true, 44, kSyn);
                add(false, 40, kRst | kAck);
                break;
            case FlowShape::Datagram: {
                const std::size_t n = std::max<std::size_t>(1, data_packets());
                for (std::size_t i = 0; i < n; ++i) {
                    const bool fwd = i % 2 == 0;
                    const auto len = fwd ? draw_size(rng_, cls.fwd_size_mean, cls.fwd_size_std, 28)
                                         : draw_size(rng_, cls.bwd_size_mean, cls.bwd_size_std, 28);
                    add(fwd, len, 0);
                }
                break;
            }
        }
        out_.manifest.push_back(LabelEntry{{src, sport}, {dst, dport}, proto, first_ts, label});
    }

    const ScenarioSpec& spec_;
    Rng rng_;
    SyntheticCapture out_;
    std::unordered_map<std::uint32_t, std::unordered_set<std::uint16_t>> used_ports_;
};

void put16(std::vector<std::uint8_t>& b, std::size_t at, std::uint16_t v) {
    b[at] = static_cast<std::uint8_t>(v >> 8);
    b[at + 1] = static_cast<std::uint8_t>(v);
}

void put32(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (24 - 8 * i));
}

void append_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_le16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::uint16_t ip_checksum(const std::uint8_t* header, std::size_t len) {
    std::uint32_t sum = 0;
    for (std::size_t i = 0; i < len; i += 2) sum += static_cast<std::uint32_t>(header[i] << 8 | header[i + 1]);
    while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
    return static_cast<std::uint16_t>(~sum);
}

std::int64_t micros(double t) { return std::llround(t * 1e6); }

using LabelKey = std::tuple<std::uint32_t, std::uint16_t, std::uint32_t, std::uint16_t, int, std::int64_t>;

LabelKey label_key(Endpoint init, Endpoint resp, Protocol proto, double start) {
    return {init.ip.value, init.port, resp.ip.value, resp.port, static_cast<int>(proto), micros(start)};
}

}  // namespace

SyntheticCapture generate(const ScenarioSpec& spec) {
    spec.validate();
    return Generator(spec).run();
}

TrafficClass benign_class(std::size_t flows) {
    TrafficClass c;
    c.label = std::string(kBenignLabel);
    c.sources = std::max<std::size_t>(1, flows / 5);
    c.flows_per_source_min = 2;
    c.flows_per_source_max = 8;
    return c;
}

TrafficClass mimicking_class(std::string label, std::size_t flows, std::size_t min_flows_per_source,
                             std::size_t max_flows_per_source, std::uint16_t port_step) {
    TrafficClass c = benign_class(flows);
    c.label = std::move(label);
    min_flows_per_source = std::max<std::size_t>(1, min_flows_per_source);
    max_flows_per_source = std::max(min_flows_per_source, max_flows_per_source);
    const std::size_t mean = (min_flows_per_source + max_flows_per_source) / 2;
    c.sources = std::max<std::size_t>(1, (flows + mean - 1) / mean);
    c.flows_per_source_min = min_flows_per_source;
    c.flows_per_source_max = max_flows_per_source;
    c.flow_rate = 0.5;
    c.port_pattern = PortPattern::SequentialIncrement;
    c.port_step = port_step;
    c.servers = 1;
    return c;
}

TrafficClass portscan_class(std::size_t flows) {
    TrafficClass c;
    c.label = "portscan";
    c.sources = 2;
    c.flows_per_source_min = c.flows_per_source_max = std::max<std::size_t>(1, flows / 2);
    c.flow_rate = 20.0;
    c.port_pattern = PortPattern::Fixed;
    c.shape = FlowShape::Probe;
    c.service_port = 1;
    c.servers = 1;
    c.iat_mean = 0.001;
    return c;
}

TrafficClass flood_class(std::size_t flows) {
    TrafficClass c;
    c.label = "hulk";
    c.sources = 5;
    c.flows_per_source_min = c.flows_per_source_max = std::max<std::size_t>(1, flows / 5);
    c.flow_rate = 5.0;
    c.servers = 1;
    c.data_packets_min = 10;
    c.data_packets_max = 30;
    c.fwd_size_mean = 400.0;
    c.fwd_size_std = 100.0;
    c.bwd_size_mean = 1400.0;
    c.bwd_size_std = 80.0;
    c.iat_mean = 0.01;
    return c;
}

std::vector<std::string> builtin_scenarios() { return {"benign", "mimicking", "five_class", "four_hosts"}; }

ScenarioSpec builtin_scenario(std::string_view name, std::uint64_t seed, const ScenarioScale& scale) {
    ScenarioSpec spec;
    spec.seed = seed;
    if (name == "benign") {
        spec.classes = {benign_class(scale.benign_flows)};
    } else if (name == "mimicking") {
        spec.classes = {benign_class(scale.benign_flows),
                        mimicking_class("slowloris", scale.attack_flows, 10, 90, 1)};
    } else if (name == "five_class") {
        spec.classes = {benign_class(scale.benign_flows), portscan_class(scale.attack_flows),
                        flood_class(scale.attack_flows),
                        mimicking_class("slowloris", scale.attack_flows, 10, 90, 1),
                        mimicking_class("slowhttptest", scale.attack_flows, 10, 70, 3)};
    } else if (name == "four_hosts") {
        const auto host = [](std::uint8_t i) { return Ipv4Address::from_octets(10, 0, 0, i); };
        const auto A = host(1), B = host(2), C = host(3), D = host(4);
        spec.duration = 60.0;
        spec.scripted = {{A, B, 0, 80, 0.0},  {A, B, 0, 80, 5.0},  {A, C, 0, 80, 10.0},
                         {A, D, 0, 80, 15.0}, {B, C, 0, 80, 20.0}, {B, C, 0, 80, 25.0},
                         {D, B, 0, 80, 30.0}, {C, A, 0, 80, 35.0}};
    } else {
        throw ValidationError("unknown scenario '" + std::string(name) + "'");
    }
    return spec;
}

ScenarioSpec load_scenario_file(const std::filesystem::path& path) {
    ScenarioSpec spec;
    std::vector<std::string> order;
    std::unordered_map<std::string, TrafficClass> classes;
    for (const auto& e : load_ini(path)) {
        const std::string where = path.string() + ":" + std::to_string(e.line);
        auto num = [&] { return detail::parse_double(e.value, where); };
        auto count = [&] {
            const long long v = detail::parse_int(e.value, where);
            if (v < 0) throw ValidationError(where + ": '" + e.key + "' must be >= 0");
            return static_cast<std::size_t>(v);
        };
        if (e.section == "scenario") {
            if (e.key == "seed") spec.seed = static_cast<std::uint64_t>(count());
            else if (e.key == "duration") spec.duration = num();
            else if (e.key == "start_epoch") spec.start_epoch = num();
            else throw ValidationError(where + ": unknown key '" + e.full_key() + "'");
            continue;
        }
        if (e.section.rfind("class.", 0) != 0)
            throw ValidationError(where + ": unknown section '" + e.section + "'");
        const std::string label = e.section.substr(6);
        if (!classes.contains(label)) {
            order.push_back(label);
            TrafficClass fresh;
            fresh.label = label;
            classes.emplace(label, fresh);
        }
        TrafficClass& c = classes.at(label);
        const std::map<std::string, std::function<void()>> setters = {
            {"sources", [&] { c.sources = count(); }},
            {"flows_per_source_min", [&] { c.flows_per_source_min = count(); }},
            {"flows_per_source_max", [&] { c.flows_per_source_max = count(); }},
            {"flow_rate", [&] { c.flow_rate = num(); }},
            {"port_pattern", [&] { c.port_pattern = parse_port_pattern(e.value); }},
            {"port_step", [&] { c.port_step = detail::parse_port(e.value, where); }},
            {"shape", [&] { c.shape = parse_flow_shape(e.value); }},
            {"service_port", [&] { c.service_port = detail::parse_port(e.value, where); }},
            {"servers", [&] { c.servers = count(); }},
            {"data_packets_min", [&] { c.data_packets_min = count(); }},
            {"data_packets_max", [&] { c.data_packets_max = count(); }},
            {"fwd_size_mean", [&] { c.fwd_size_mean = num(); }},
            {"fwd_size_std", [&] { c.fwd_size_std = num(); }},
            {"bwd_size_mean", [&] { c.bwd_size_mean = num(); }},
            {"bwd_size_std", [&] { c.bwd_size_std = num(); }},
            {"iat_mean", [&] { c.iat_mean = num(); }},
        };
        const auto it = setters.find(e.key);
        if (it == setters.end()) throw ValidationError(where + ": unknown key '" + e.full_key() + "'");
        it->second();
    }
    for (const auto& label : order) spec.classes.push_back(classes.at(label));
    spec.validate();
    return spec;
}

std::vector<std::uint8_t> encode_pcap(std::span<const PacketRecord> packets,
                                      const PcapWriteOptions& options) {
    if (options.snaplen < 64) throw ValidationError("snaplen must be >= 64");
    std::vector<std::uint8_t> out;
    append_le32(out, 0xA1B2C3D4);
    append_le16(out, 2);
    append_le16(out, 4);
    append_le32(out, 0);  // thiszone
    append_le32(out, 0);  // sigfigs
    append_le32(out, options.snaplen);
    append_le32(out, kLinkTypeEthernet);

    std::uint16_t ip_id = 0;
    double previous = -1.0;
    for (const auto& p : packets) {
        if (p.timestamp < previous) throw ValidationError("packets must be timestamp-sorted");
        previous = p.timestamp;
        if (!(p.timestamp >= 0.0) || p.timestamp >= 4294967296.0)
            throw ValidationError("timestamp outside the pcap range");
        const std::size_t l4 = p.protocol == Protocol::Tcp ? 20 : 8;
        if (p.ip_total_length < 20 + l4)
            throw ValidationError("ip_total_length " + std::to_string(p.ip_total_length) +
                                  " is below the header minimum");

        std::vector<std::uint8_t> frame(14 + 20 + l4, 0);
        frame[0] = frame[6] = 0x02;  // locally administered MACs
        frame[5] = 0x02;
        frame[11] = 0x01;
        put16(frame, 12, 0x0800);
        frame[14] = 0x45;
        put16(frame, 16, p.ip_total_length);
        put16(frame, 18, ip_id++);
        put16(frame, 20, 0x4000);  // DF
        frame[22] = 64;
        frame[23] = static_cast<std::uint8_t>(p.protocol);
        put32(frame, 26, p.src_ip.value);
        put32(frame, 30, p.dst_ip.value);
        put16(frame, 24, ip_checksum(&frame[14], 20));
        put16(frame, 34, p.src_port);
        put16(frame, 36, p.dst_port);
        if (p.protocol == Protocol::Tcp) {
            frame[46] = 5 << 4;
            frame[47] = p.tcp_flags;
            put16(frame, 48, 65535);
        } else {
            put16(frame, 38, static_cast<std::uint16_t>(p.ip_total_length - 20));
        }
        const std::uint32_t orig_len = 14u + p.ip_total_length;
        const std::uint32_t incl_len = std::min(orig_len, options.snaplen);
        frame.resize(incl_len, 0);

        double sec = std::floor(p.timestamp);
        long long usec = std::llround((p.timestamp - sec) * 1e6);
        if (usec >= 1000000) {
            sec += 1.0;
            usec -= 1000000;
        }
        append_le32(out, static_cast<std::uint32_t>(sec));
        append_le32(out, static_cast<std::uint32_t>(usec));
        append_le32(out, incl_len);
        append_le32(out, orig_len);
        out.insert(out.end(), frame.begin(), frame.end());
    }
    return out;
}

void write_pcap(std::span<const PacketRecord> packets, const std::filesystem::path& path,
                const PcapWriteOptions& options) {
    const auto bytes = encode_pcap(packets, options);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("error writing '" + path.string() + "'");
}

void write_label_manifest(std::ostream& out, std::span<const LabelEntry> entries) {
    out << "initiator_ip,initiator_port,responder_ip,responder_port,protocol,start_time,label\n";
    char ts[64];
    for (const auto& e : entries) {
        std::snprintf(ts, sizeof ts, "%.6f", e.start_time);
        out << e.initiator.ip.to_string() << ',' << e.initiator.port << ','
            << e.responder.ip.to_string() << ',' << e.responder.port << ',' << to_string(e.protocol)
            << ',' << ts << ',' << e.label << '\n';
    }
}

void write_label_manifest(const std::filesystem::path& path, std::span<const LabelEntry> entries) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_label_manifest(out, entries);
}

std::vector<LabelEntry> read_label_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) ||
        detail::trim(line) != "initiator_ip,initiator_port,responder_ip,responder_port,protocol,start_time,label")
        throw ValidationError(path.string() + ": not a label manifest");
    std::vector<LabelEntry> entries;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        const auto f = detail::split(line, ',');
        if (f.size() != 7) throw ValidationError(where + ": expected 7 fields");
        entries.push_back(LabelEntry{{Ipv4Address::parse(f[0]), detail::parse_port(f[1], where)},
                                     {Ipv4Address::parse(f[2]), detail::parse_port(f[3], where)},
                                     parse_protocol(f[4]),
                                     detail::parse_double(f[5], where),
                                     f[6]});
    }
    return entries;
}

std::size_t apply_labels(std::span<FlowFeatureVector> rows, std::span<const LabelEntry> manifest) {
    std::map<LabelKey, const LabelEntry*> index;
    for (const auto& e : manifest) index[label_key(e.initiator, e.responder, e.protocol, e.start_time)] = &e;
    std::size_t unmatched = 0;
    for (auto& row : rows) {
        const auto it = index.find(label_key(row.initiator, row.responder(), row.key.protocol, row.start_time));
        if (it == index.end()) {
            ++unmatched;
            continue;
        }
        row.label = it->second->label;
    }
    return unmatched;
}

}  // namespace flowagg
