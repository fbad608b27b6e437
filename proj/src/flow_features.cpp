#include "flowagg/flow_features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "flowagg/errors.hpp"
#include "text_util.hpp"

namespace flowagg {

namespace {

constexpr std::array<std::string_view, kStatsPerDirection> kStatNames = {
    "pkt_count",    "byte_count",    "pkt_len_mean",   "pkt_len_std",
    "pkt_len_min",  "pkt_len_max",   "iat_mean",       "iat_std",
    "iat_min",      "iat_max",       "time_from_first_mean",
    "flag_syn_count", "flag_ack_count", "flag_fin_count", "flag_rst_count",
    "flag_psh_count", "flag_urg_count",
};

constexpr std::array<std::string_view, 6> kMetadataColumns = {
    "initiator_ip", "initiator_port", "responder_ip", "responder_port", "protocol", "start_time",
};

struct Summary {
    double mean = 0.0, std = 0.0, min = 0.0, max = 0.0;
};

Summary summarize(std::span<const double> xs) {
    Summary s;
    if (xs.empty()) return s;
    double sum = 0.0;
    s.min = xs[0];
    s.max = xs[0];
    for (double x : xs) {
        sum += x;
        s.min = std::min(s.min, x);
        s.max = std::max(s.max, x);
    }
    s.mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(xs.size()));
    // Guard against rounding pushing the mean outside [min, max].
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

void fill_direction(std::span<const PacketRecord> packets, Direction d,
                    std::array<double, kFlowFeatureCount>& out) {
    auto set = [&](DirectionStat s, double v) { out[feature_index(d, s)] = v; };
    if (packets.empty()) return;

    std::vector<double> lengths;
    std::vector<double> times;
    lengths.reserve(packets.size());
    times.reserve(packets.size());
    double bytes = 0.0;
    double syn = 0, ack = 0, fin = 0, rst = 0, psh = 0, urg = 0;
    for (const auto& p : packets) {
        lengths.push_back(p.ip_total_length);
        times.push_back(p.timestamp);
        bytes += p.ip_total_length;
        syn += p.has_flag(tcp_flag::kSyn);
        ack += p.has_flag(tcp_flag::kAck);
        fin += p.has_flag(tcp_flag::kFin);
        rst += p.has_flag(tcp_flag::kRst);
        psh += p.has_flag(tcp_flag::kPsh);
        urg += p.has_flag(tcp_flag::kUrg);
    }

    set(DirectionStat::PktCount, static_cast<double>(packets.size()));
    set(DirectionStat::ByteCount, bytes);
    const Summary len = summarize(lengths);
    set(DirectionStat::PktLenMean, len.mean);
    set(DirectionStat::PktLenStd, len.std);
    set(DirectionStat::PktLenMin, len.min);
    set(DirectionStat::PktLenMax, len.max);

    std::sort(times.begin(), times.end());
    if (times.size() >= 2) {
        std::vector<double> gaps;
        gaps.reserve(times.size() - 1);
        double from_first = 0.0;
        for (std::size_t i = 1; i < times.size(); ++i) {
            gaps.push_back(times[i] - times[i - 1]);
            from_first += times[i] - times[0];
        }
        const Summary iat = summarize(gaps);
        set(DirectionStat::IatMean, iat.mean);
        set(DirectionStat::IatStd, iat.std);
        set(DirectionStat::IatMin, iat.min);
        set(DirectionStat::IatMax, iat.max);
        set(DirectionStat::TimeFromFirstMean, from_first / static_cast<double>(gaps.size()));
    }

    set(DirectionStat::FlagSynCount, syn);
    set(DirectionStat::FlagAckCount, ack);
    set(DirectionStat::FlagFinCount, fin);
    set(DirectionStat::FlagRstCount, rst);
    set(DirectionStat::FlagPshCount, psh);
    set(DirectionStat::FlagUrgCount, urg);
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

const std::array<std::string, kFlowFeatureCount>& flow_feature_names() {
    static const auto names = [] {
        std::array<std::string, kFlowFeatureCount> out;
        for (std::size_t i = 0; i < kStatsPerDirection; ++i) {
            out[i] = "fwd_" + std::string(kStatNames[i]);
            out[kStatsPerDirection + i] = "bwd_" + std::string(kStatNames[i]);
        }
        return out;
    }();
    return names;
}

FlowFeatureVector extract_features(const BiFlow& flow) {
    FlowFeatureVector row;
    row.key = flow.key;
    row.initiator = flow.initiator;
    row.start_time = flow.start_time;
    fill_direction(flow.fwd_packets, Direction::Fwd, row.values);
    fill_direction(flow.bwd_packets, Direction::Bwd, row.values);
    return row;
}

std::vector<FlowFeatureVector> extract_all(std::span<const BiFlow> flows) {
    std::vector<FlowFeatureVector> rows;
    rows.reserve(flows.size());
    for (const auto& f : flows) rows.push_back(extract_features(f));
    return rows;
}

std::vector<std::string> flow_csv_header() {
    const auto& names = flow_feature_names();
    std::vector<std::string> header(names.begin(), names.end());
    header.emplace_back(kNumFlowsColumn);
    header.emplace_back(kSrcPortsDeltaColumn);
    header.emplace_back("label");
    for (auto c : kMetadataColumns) header.emplace_back(c);
    return header;
}

void write_flow_csv(std::ostream& out, std::span<const FlowFeatureVector> rows) {
    out << detail::join(flow_csv_header(), ",") << '\n';
    for (const auto& row : rows) {
        if (row.label.find_first_of(",\n\"") != std::string::npos)
            throw ValidationError("label '" + row.label + "' contains a CSV delimiter");
        for (double v : row.values) out << format_value(v) << ',';
        out << (row.num_flows ? format_value(*row.num_flows) : "") << ',';
        out << (row.src_ports_delta ? format_value(*row.src_ports_delta) : "") << ',';
        out << row.label << ',';
        const Endpoint responder = row.responder();
        out << row.initiator.ip.to_string() << ',' << row.initiator.port << ','
            << responder.ip.to_string() << ',' << responder.port << ','
            << to_string(row.key.protocol) << ',' << format_value(row.start_time) << '\n';
    }
}

void write_flow_csv(const std::filesystem::path& path, std::span<const FlowFeatureVector> rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_flow_csv(out, rows);
    if (!out) throw IoError("error writing '" + path.string() + "'");
}

std::vector<FlowFeatureVector> read_flow_csv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(source + ": empty flow CSV");
    const auto header = detail::split(detail::trim(line), ',');
    if (header != flow_csv_header())
        throw ValidationError(source + ": header does not match the flow CSV schema");

    std::vector<FlowFeatureVector> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto fields = detail::split(line, ',');
        const std::string where = source + ":" + std::to_string(line_no);
        if (fields.size() != header.size())
            throw ValidationError(where + ": expected " + std::to_string(header.size()) +
                                  " fields, got " + std::to_string(fields.size()));
        FlowFeatureVector row;
        for (std::size_t i = 0; i < kFlowFeatureCount; ++i)
            row.values[i] = detail::parse_double(fields[i], where);
        std::size_t c = kFlowFeatureCount;
        if (!fields[c].empty()) row.num_flows = detail::parse_double(fields[c], where);
        ++c;
        if (!fields[c].empty()) row.src_ports_delta = detail::parse_double(fields[c], where);
        ++c;
        row.label = fields[c++];
        const Endpoint initiator{Ipv4Address::parse(fields[c]),
                                 detail::parse_port(fields[c + 1], where)};
        const Endpoint responder{Ipv4Address::parse(fields[c + 2]),
                                 detail::parse_port(fields[c + 3], where)};
        const Protocol proto = parse_protocol(fields[c + 4]);
        row.start_time = detail::parse_double(fields[c + 5], where);
        row.initiator = initiator;
        row.key = FlowKey::from_endpoints(initiator, responder, proto);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<FlowFeatureVector> read_flow_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return read_flow_csv(in, path.string());
}

}  // namespace flowagg
