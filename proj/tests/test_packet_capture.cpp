#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "flowagg/errors.hpp"
#include "flowagg/packet_capture.hpp"
#include "flowagg/synth_traffic.hpp"

using namespace flowagg;

namespace {

// Hand-built capture images, independent of the library's writer.
struct PcapBuilder {
    std::vector<std::uint8_t> bytes;
    bool big_endian = false;

    void u16(std::uint16_t v) {
        if (big_endian) bytes.insert(bytes.end(), {std::uint8_t(v >> 8), std::uint8_t(v)});
        else bytes.insert(bytes.end(), {std::uint8_t(v), std::uint8_t(v >> 8)});
    }
    void u32(std::uint32_t v) {
        if (big_endian) {
            u16(std::uint16_t(v >> 16));
            u16(std::uint16_t(v));
        } else {
            u16(std::uint16_t(v));
            u16(std::uint16_t(v >> 16));
        }
    }
    PcapBuilder(std::uint32_t magic = 0xa1b2c3d4, std::uint32_t link = 1, bool be = false) : big_endian(be) {
        u32(magic);
        u16(2);
        u16(4);
        u32(0);
        u32(0);
        u32(65535);
        u32(link);
    }
    void record(std::uint32_t sec, std::uint32_t frac, const std::vector<std::uint8_t>& frame) {
        u32(sec);
        u32(frac);
        u32(static_cast<std::uint32_t>(frame.size()));
        u32(static_cast<std::uint32_t>(frame.size()));
        bytes.insert(bytes.end(), frame.begin(), frame.end());
    }
};

void be16(std::vector<std::uint8_t>& f, std::uint16_t v) {
    f.push_back(std::uint8_t(v >> 8));
    f.push_back(std::uint8_t(v));
}

std::vector<std::uint8_t> ethernet(std::uint16_t ethertype) {
    std::vector<std::uint8_t> f(12, 0x02);
    be16(f, ethertype);
    return f;
}

// IPv4 + TCP (or UDP) headers; total_length as stated, payload not present.
std::vector<std::uint8_t> ipv4(std::uint8_t proto, std::uint16_t total_length, std::uint16_t sport,
                               std::uint16_t dport, std::uint8_t flags, std::uint16_t frag = 0) {
    std::vector<std::uint8_t> f = {0x45, 0};
    be16(f, total_length);
    be16(f, 1);
    be16(f, frag);
    f.insert(f.end(), {64, proto, 0, 0, 10, 0, 0, 1, 10, 0, 0, 2});
    be16(f, sport);
    be16(f, dport);
    if (proto == 6) {
        f.insert(f.end(), 8, 0);
        f.push_back(0x50);
        f.push_back(flags);
        f.insert(f.end(), 6, 0);
    } else {
        be16(f, static_cast<std::uint16_t>(total_length - 20));
        be16(f, 0);
    }
    return f;
}

std::vector<std::uint8_t> eth_ipv4(std::uint8_t proto, std::uint16_t len, std::uint8_t flags = 0) {
    auto f = ethernet(0x0800);
    auto ip = ipv4(proto, len, 1234, 80, flags);
    f.insert(f.end(), ip.begin(), ip.end());
    return f;
}

}  // namespace

TEST_CASE("single SYN packet") {
    PcapBuilder b;
    b.record(1000, 250000, eth_ipv4(6, 60, tcp_flag::kSyn));
    const auto r = parse_pcap(b.bytes);
    REQUIRE(r.packets.size() == 1);
    const auto& p = r.packets[0];
    CHECK(p.tcp_flags == tcp_flag::kSyn);
    CHECK(p.ip_total_length == 60);
    CHECK(p.protocol == Protocol::Tcp);
    CHECK(p.src_ip.to_string() == "10.0.0.1");
    CHECK(p.dst_ip.to_string() == "10.0.0.2");
    CHECK(p.src_port == 1234);
    CHECK(p.dst_port == 80);
    CHECK(p.timestamp == doctest::Approx(1000.25));
    CHECK(r.skipped == 0);
    CHECK(r.link_type == kLinkTypeEthernet);
}

TEST_CASE("ARP, IPv6, VLAN, ICMP and fragments are skipped and counted") {
    PcapBuilder b;
    b.record(1, 0, eth_ipv4(6, 40, tcp_flag::kAck));
    auto arp = ethernet(0x0806);
    arp.resize(42, 0);
    b.record(2, 0, arp);
    auto v6 = ethernet(0x86dd);
    v6.resize(74, 0);
    b.record(3, 0, v6);
    auto vlan = ethernet(0x8100);
    vlan.resize(64, 0);
    b.record(4, 0, vlan);
    b.record(5, 0, [] {
        auto f = ethernet(0x0800);
        auto ip = ipv4(1, 28, 0, 0, 0);
        f.insert(f.end(), ip.begin(), ip.end());
        return f;
    }());
    b.record(6, 0, [] {
        auto f = ethernet(0x0800);
        auto ip = ipv4(6, 40, 1, 2, 0, 0x2000);  // more-fragments set
        f.insert(f.end(), ip.begin(), ip.end());
        return f;
    }());
    const auto r = parse_pcap(b.bytes);
    CHECK(r.packets.size() == 1);
    CHECK(r.skipped == 5);
}

TEST_CASE("UDP packets carry no flags") {
    PcapBuilder b;
    b.record(1, 0, eth_ipv4(17, 48));
    const auto r = parse_pcap(b.bytes);
    REQUIRE(r.packets.size() == 1);
    CHECK(r.packets[0].protocol == Protocol::Udp);
    CHECK(r.packets[0].tcp_flags == 0);
    CHECK(r.packets[0].ip_total_length == 48);
}

TEST_CASE("byte-swapped and nanosecond headers") {
    SUBCASE("big-endian microsecond") {
        PcapBuilder b(0xa1b2c3d4, 1, true);
        b.record(7, 500000, eth_ipv4(6, 52, tcp_flag::kAck));
        const auto r = parse_pcap(b.bytes);
        REQUIRE(r.packets.size() == 1);
        CHECK(r.packets[0].timestamp == 7.5);
    }
    SUBCASE("little-endian nanosecond") {
        PcapBuilder b(0xa1b23c4d);
        b.record(7, 250000000, eth_ipv4(6, 52, tcp_flag::kAck));
        const auto r = parse_pcap(b.bytes);
        REQUIRE(r.packets.size() == 1);
        CHECK(r.packets[0].timestamp == 7.25);
    }
    SUBCASE("big-endian nanosecond") {
        PcapBuilder b(0xa1b23c4d, 1, true);
        b.record(9, 1, eth_ipv4(6, 52, tcp_flag::kAck));
        const auto r = parse_pcap(b.bytes);
        REQUIRE(r.packets.size() == 1);
        CHECK(r.packets[0].timestamp == pcap_timestamp(9, 1, true));
    }
}

TEST_CASE("raw IP link type") {
    PcapBuilder b(0xa1b2c3d4, kLinkTypeRaw);
    b.record(1, 0, ipv4(6, 40, 5, 6, tcp_flag::kRst));
    const auto r = parse_pcap(b.bytes);
    REQUIRE(r.packets.size() == 1);
    CHECK(r.packets[0].tcp_flags == tcp_flag::kRst);
    CHECK(r.link_type == kLinkTypeRaw);
}

TEST_CASE("format errors") {
    SUBCASE("bad magic") {
        PcapBuilder b(0x0a0d0d0a);
        CHECK_THROWS_AS(parse_pcap(b.bytes), PcapFormatError);
    }
    SUBCASE("short global header") {
        std::vector<std::uint8_t> bytes = {0xd4, 0xc3, 0xb2, 0xa1};
        CHECK_THROWS_AS(parse_pcap(bytes), PcapFormatError);
    }
    SUBCASE("unsupported link type") {
        PcapBuilder b(0xa1b2c3d4, 105);
        CHECK_THROWS_AS(parse_pcap(b.bytes), PcapFormatError);
    }
    SUBCASE("truncated record header names the offset") {
        PcapBuilder b;
        b.record(1, 0, eth_ipv4(6, 40));
        const std::size_t offset = b.bytes.size();
        b.u32(5);
        b.u32(0);
        try {
            parse_pcap(b.bytes);
            FAIL("expected PcapFormatError");
        } catch (const PcapFormatError& e) {
            CHECK(std::string(e.what()).find("byte offset " + std::to_string(offset)) != std::string::npos);
        }
    }
    SUBCASE("truncated record body") {
        PcapBuilder b;
        b.record(1, 0, eth_ipv4(6, 40));
        b.bytes.resize(b.bytes.size() - 3);
        CHECK_THROWS_AS(parse_pcap(b.bytes), PcapFormatError);
    }
}

TEST_CASE("missing file is an I/O error") {
    CHECK_THROWS_AS(read_pcap("/nonexistent/capture.pcap"), IoError);
}

TEST_CASE("file order is kept even when timestamps go backwards") {
    PcapBuilder b;
    b.record(5, 0, eth_ipv4(6, 40, tcp_flag::kAck));
    b.record(3, 0, eth_ipv4(6, 44, tcp_flag::kAck));
    const auto r = parse_pcap(b.bytes);
    REQUIRE(r.packets.size() == 2);
    CHECK(r.packets[0].timestamp == 5.0);
    CHECK(r.packets[1].timestamp == 3.0);
}

TEST_CASE("round trip through the synthetic writer") {
    std::vector<PacketRecord> packets(3);
    packets[0] = {pcap_timestamp(1499000000, 123456), Ipv4Address::parse("10.1.0.1"),
                  Ipv4Address::parse("192.168.1.1"), 40001, 80, Protocol::Tcp, 60, tcp_flag::kSyn};
    packets[1] = {pcap_timestamp(1499000000, 223456), Ipv4Address::parse("192.168.1.1"),
                  Ipv4Address::parse("10.1.0.1"), 80, 40001, Protocol::Tcp, 60,
                  static_cast<std::uint8_t>(tcp_flag::kSyn | tcp_flag::kAck)};
    packets[2] = {pcap_timestamp(1499000001, 5), Ipv4Address::parse("10.1.0.1"),
                  Ipv4Address::parse("192.168.1.9"), 5353, 53, Protocol::Udp, 1500, 0};
    const auto bytes = encode_pcap(packets);
    const auto r = parse_pcap(bytes);
    CHECK(r.skipped == 0);
    CHECK(r.packets == packets);

    const auto path = std::filesystem::temp_directory_path() / "flowagg_roundtrip.pcap";
    write_pcap(packets, path);
    CHECK(read_pcap(path).packets == packets);
    std::filesystem::remove(path);
}

TEST_CASE("empty capture is a header-only file") {
    const auto bytes = encode_pcap({});
    CHECK(bytes.size() == 24);
    const auto r = parse_pcap(bytes);
    CHECK(r.packets.empty());
    CHECK(r.skipped == 0);
}

TEST_CASE("addresses and protocols") {
    CHECK(Ipv4Address::parse("192.168.10.5").to_string() == "192.168.10.5");
    CHECK(Ipv4Address::from_octets(1, 2, 3, 4).value == 0x01020304u);
    CHECK_THROWS_AS(Ipv4Address::parse("1.2.3"), ValidationError);
    CHECK_THROWS_AS(Ipv4Address::parse("1.2.3.256"), ValidationError);
    CHECK(parse_protocol("tcp") == Protocol::Tcp);
    CHECK(to_string(Protocol::Udp) == "UDP");
    CHECK_THROWS_AS(parse_protocol("icmp"), ValidationError);
}
