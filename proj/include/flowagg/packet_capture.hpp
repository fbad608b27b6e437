#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace flowagg {

enum class Protocol : std::uint8_t { Tcp = 6, Udp = 17 };

std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view text);

// TCP flag bits as they appear in the TCP header.
namespace tcp_flag {
inline constexpr std::uint8_t kFin = 0x01;
inline constexpr std::uint8_t kSyn = 0x02;
inline constexpr std::uint8_t kRst = 0x04;
inline constexpr std::uint8_t kPsh = 0x08;
inline constexpr std::uint8_t kAck = 0x10;
inline constexpr std::uint8_t kUrg = 0x20;
inline constexpr std::uint8_t kTracked = kFin | kSyn | kRst | kPsh | kAck | kUrg;
}  // namespace tcp_flag

struct Ipv4Address {
    std::uint32_t value = 0;  // host byte order

    static Ipv4Address from_octets(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
        return {static_cast<std::uint32_t>(a) << 24 | static_cast<std::uint32_t>(b) << 16 |
                static_cast<std::uint32_t>(c) << 8 | d};
    }
    static Ipv4Address parse(std::string_view dotted);
    std::string to_string() const;

    auto operator<=>(const Ipv4Address&) const = default;
};

struct PacketRecord {
    double timestamp = 0.0;  // seconds since epoch, microsecond resolution
    Ipv4Address src_ip;
    Ipv4Address dst_ip;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    Protocol protocol = Protocol::Tcp;
    std::uint16_t ip_total_length = 0;
    std::uint8_t tcp_flags = 0;  // tcp_flag bits; always 0 for UDP

    bool has_flag(std::uint8_t bit) const { return (tcp_flags & bit) != 0; }
    bool operator==(const PacketRecord&) const = default;
};

// Timestamp as reconstructed from a pcap record header. Producers that want
// exact round trips should build timestamps with this function.
double pcap_timestamp(std::uint32_t seconds, std::uint32_t fraction, bool nanosecond = false);

struct CaptureReadResult {
    std::vector<PacketRecord> packets;
    std::size_t skipped = 0;  // non-IPv4, non-TCP/UDP, fragments, malformed headers
    std::uint32_t link_type = 0;
};

inline constexpr std::uint32_t kLinkTypeEthernet = 1;
inline constexpr std::uint32_t kLinkTypeRaw = 101;

// Parses a classic pcap image held in memory. Throws PcapFormatError on a bad
// magic number, unsupported link type, or a record that runs past the end of
// the buffer.
CaptureReadResult parse_pcap(std::span<const std::uint8_t> bytes);

// Reads a classic pcap file. Throws IoError if the file cannot be read.
CaptureReadResult read_pcap(const std::filesystem::path& path);

}  // namespace flowagg
