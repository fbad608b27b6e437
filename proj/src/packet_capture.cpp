#include "flowagg/packet_capture.hpp"

#include <charconv>
#include <fstream>
#include <iterator>

#include "flowagg/errors.hpp"

namespace flowagg {

namespace {

constexpr std::size_t kGlobalHeaderSize = 24;
constexpr std::size_t kRecordHeaderSize = 16;
constexpr std::size_t kEthernetHeaderSize = 14;
constexpr std::uint16_t kEtherTypeIpv4 = 0x0800;

std::uint16_t load_be16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] << 8 | p[1]);
}

std::uint32_t load_be32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) << 24 | static_cast<std::uint32_t>(p[1]) << 16 |
           static_cast<std::uint32_t>(p[2]) << 8 | p[3];
}

std::uint32_t load_le32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[3]) << 24 | static_cast<std::uint32_t>(p[2]) << 16 |
           static_cast<std::uint32_t>(p[1]) << 8 | p[0];
}

// Decodes an IPv4 datagram. Returns false when the packet is not a whole
// IPv4 TCP/UDP packet with readable transport ports.
bool decode_ipv4(std::span<const std::uint8_t> ip, PacketRecord& out) {
    if (ip.size() < 20) return false;
    if ((ip[0] >> 4) != 4) return false;
    const std::size_t header_len = static_cast<std::size_t>(ip[0] & 0x0f) * 4;
    if (header_len < 20 || ip.size() < header_len) return false;

    const std::uint16_t total_length = load_be16(&ip[2]);
    const std::uint16_t frag = load_be16(&ip[6]);
    const bool more_fragments = (frag & 0x2000) != 0;
    const std::uint16_t frag_offset = frag & 0x1fff;
    if (more_fragments || frag_offset != 0) return false;

    const std::uint8_t proto = ip[9];
    const auto transport = ip.subspan(header_len);
    std::size_t min_transport = 0;
    if (proto == static_cast<std::uint8_t>(Protocol::Tcp)) {
        if (transport.size() < 14) return false;
        min_transport = 20;
        out.protocol = Protocol::Tcp;
        out.tcp_flags = transport[13] & tcp_flag::kTracked;
    } else if (proto == static_cast<std::uint8_t>(Protocol::Udp)) {
        if (transport.size() < 4) return false;
        min_transport = 8;
        out.protocol = Protocol::Udp;
        out.tcp_flags = 0;
    } else {
        return false;
    }
    if (total_length < header_len + min_transport) return false;

    out.ip_total_length = total_length;
    out.src_ip = Ipv4Address{load_be32(&ip[12])};
    out.dst_ip = Ipv4Address{load_be32(&ip[16])};
    out.src_port = load_be16(&transport[0]);
    out.dst_port = load_be16(&transport[2]);
    return true;
}

std::string offset_message(const char* what, std::size_t offset) {
    return std::string(what) + " at byte offset " + std::to_string(offset);
}

}  // namespace

std::string_view to_string(Protocol p) { return p == Protocol::Tcp ? "TCP" : "UDP"; }

Protocol parse_protocol(std::string_view text) {
    if (text == "TCP" || text == "tcp" || text == "6") return Protocol::Tcp;
    if (text == "UDP" || text == "udp" || text == "17") return Protocol::Udp;
    throw ValidationError("unknown protocol '" + std::string(text) + "'");
}

Ipv4Address Ipv4Address::parse(std::string_view dotted) {
    std::uint32_t value = 0;
    const char* p = dotted.data();
    const char* end = dotted.data() + dotted.size();
    for (int i = 0; i < 4; ++i) {
        unsigned octet = 0;
        auto [next, ec] = std::from_chars(p, end, octet);
        if (ec != std::errc{} || octet > 255 || next == p)
            throw ValidationError("invalid IPv4 address '" + std::string(dotted) + "'");
        value = value << 8 | octet;
        p = next;
        if (i < 3) {
            if (p == end || *p != '.')
                throw ValidationError("invalid IPv4 address '" + std::string(dotted) + "'");
            ++p;
        }
    }
    if (p != end) throw ValidationError("invalid IPv4 address '" + std::string(dotted) + "'");
    return Ipv4Address{value};
}

std::string Ipv4Address::to_string() const {
    return std::to_string(value >> 24) + '.' + std::to_string(value >> 16 & 0xff) + '.' +
           std::to_string(value >> 8 & 0xff) + '.' + std::to_string(value & 0xff);
}

double pcap_timestamp(std::uint32_t seconds, std::uint32_t fraction, bool nanosecond) {
    return static_cast<double>(seconds) +
           static_cast<double>(fraction) * (nanosecond ? 1e-9 : 1e-6);
}

CaptureReadResult parse_pcap(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kGlobalHeaderSize)
        throw PcapFormatError(offset_message("truncated pcap global header", 0));

    const std::uint32_t magic = load_le32(bytes.data());
    bool swapped = false;
    bool nanosecond = false;
    switch (magic) {
        case 0xA1B2C3D4: break;
        case 0xD4C3B2A1: swapped = true; break;
        case 0xA1B23C4D: nanosecond = true; break;
        case 0x4D3CB2A1: swapped = true; nanosecond = true; break;
        default: throw PcapFormatError(offset_message("bad pcap magic number", 0));
    }
    auto load32 = [swapped](const std::uint8_t* p) { return swapped ? load_be32(p) : load_le32(p); };

    CaptureReadResult result;
    result.link_type = load32(bytes.data() + 20) & 0x0fffffff;
    if (result.link_type != kLinkTypeEthernet && result.link_type != kLinkTypeRaw)
        throw PcapFormatError(offset_message(
            ("unsupported link type " + std::to_string(result.link_type)).c_str(), 20));

    std::size_t offset = kGlobalHeaderSize;
    while (offset < bytes.size()) {
        if (bytes.size() - offset < kRecordHeaderSize)
            throw PcapFormatError(offset_message("truncated packet header", offset));
        const std::uint8_t* rec = bytes.data() + offset;
        const std::uint32_t ts_sec = load32(rec);
        const std::uint32_t ts_frac = load32(rec + 4);
        const std::uint32_t incl_len = load32(rec + 8);
        const std::size_t data_offset = offset + kRecordHeaderSize;
        if (bytes.size() - data_offset < incl_len)
            throw PcapFormatError(offset_message("truncated packet data", data_offset));
        auto frame = bytes.subspan(data_offset, incl_len);
        offset = data_offset + incl_len;

        std::span<const std::uint8_t> ip;
        if (result.link_type == kLinkTypeEthernet) {
            if (frame.size() < kEthernetHeaderSize ||
                load_be16(&frame[12]) != kEtherTypeIpv4) {
                ++result.skipped;
                continue;
            }
            ip = frame.subspan(kEthernetHeaderSize);
        } else {
            ip = frame;
        }

        PacketRecord packet;
        if (!decode_ipv4(ip, packet)) {
            ++result.skipped;
            continue;
        }
        packet.timestamp = pcap_timestamp(ts_sec, ts_frac, nanosecond);
        result.packets.push_back(packet);
    }
    return result;
}

CaptureReadResult read_pcap(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open pcap file '" + path.string() + "'");
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>()};
    if (in.bad()) throw IoError("error reading pcap file '" + path.string() + "'");
    try {
        return parse_pcap(bytes);
    } catch (const PcapFormatError& e) {
        throw PcapFormatError(path.string() + ": " + e.what());
    }
}

}  // namespace flowagg
