#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "flowagg/flow_assembly.hpp"
#include "flowagg/flow_features.hpp"
#include "flowagg/synth_traffic.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Workspace {
    fs::path dir;
    Workspace() {
        dir = fs::temp_directory_path() / ("flowagg_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~Workspace() { fs::remove_all(dir); }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args, std::string* out = nullptr) {
    const fs::path capture = fs::temp_directory_path() / ("flowagg_cli_out_" + std::to_string(::getpid()));
    const std::string cmd = std::string("\"") + FLOWAGG_CLI + "\" " + args + " > \"" + capture.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    if (out) {
        std::ifstream in(capture);
        std::stringstream s;
        s << in.rdbuf();
        *out = s.str();
    }
    fs::remove(capture);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("help and usage errors") {
    std::string out;
    CHECK(run("--help", &out) == 0);
    CHECK(out.find("replicate") != std::string::npos);
    CHECK(run("extract --help") == 0);
    CHECK(run("", &out) == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("extract --pcap a.pcap --out b.csv --bogus", &out) == 1);
    CHECK(out.find("--bogus") != std::string::npos);
    CHECK(run("--set model.colour=red --show-config extract --pcap a --out b", &out) == 1);
    CHECK(out.find("model.colour") != std::string::npos);
}

TEST_CASE("missing files are I/O errors") {
    Workspace ws;
    std::string out;
    CHECK(run("extract --pcap " + (ws / "missing.pcap") + " --out " + (ws / "x.csv"), &out) == 2);
    CHECK(out.find("missing.pcap") != std::string::npos);
    CHECK(run("--config " + (ws / "missing.ini") + " replicate") == 2);
}

TEST_CASE("config precedence: flag over file over default") {
    Workspace ws;
    {
        std::ofstream cfg(ws / "c.ini");
        cfg << "seed = 5\n[model]\nepochs = 77\nlearning_rate = 0.3\n";
    }
    std::string out;
    REQUIRE(run("--show-config replicate", &out) == 0);
    auto j = nlohmann::json::parse(out);
    CHECK(j["seed"] == 7);
    CHECK(j["model.epochs"] == 50);

    REQUIRE(run("--config " + (ws / "c.ini") + " --show-config replicate", &out) == 0);
    j = nlohmann::json::parse(out);
    CHECK(j["seed"] == 5);
    CHECK(j["model.epochs"] == 77);

    REQUIRE(run("--config " + (ws / "c.ini") + " --show-config --seed 9 train --in x --model y --epochs 99", &out) == 0);
    j = nlohmann::json::parse(out);
    CHECK(j["seed"] == 9);
    CHECK(j["model.epochs"] == 99);
    CHECK(j["model.learning_rate"] == 0.3);

    REQUIRE(run("--config " + (ws / "c.ini") + " --set model.learning_rate=0.2 --show-config replicate", &out) == 0);
    CHECK(nlohmann::json::parse(out)["model.learning_rate"] == 0.2);
}

TEST_CASE("extract reproduces the library's flows") {
    Workspace ws;
    std::vector<flowagg::PacketRecord> packets(3);
    const auto a = flowagg::Ipv4Address::parse("10.1.0.1");
    const auto b = flowagg::Ipv4Address::parse("192.168.1.1");
    packets[0] = {flowagg::pcap_timestamp(100, 0), a, b, 40000, 80, flowagg::Protocol::Tcp, 60, flowagg::tcp_flag::kSyn};
    packets[1] = {flowagg::pcap_timestamp(100, 1000), b, a, 80, 40000, flowagg::Protocol::Tcp, 60,
                  flowagg::tcp_flag::kSyn | flowagg::tcp_flag::kAck};
    packets[2] = {flowagg::pcap_timestamp(100, 2000), a, b, 40000, 80, flowagg::Protocol::Tcp, 52, flowagg::tcp_flag::kAck};
    flowagg::write_pcap(packets, ws / "three.pcap");
    REQUIRE(run("extract --pcap " + (ws / "three.pcap") + " --out " + (ws / "flows.csv")) == 0);
    const auto rows = flowagg::read_flow_csv(fs::path(ws / "flows.csv"));
    const auto expected = flowagg::extract_all(flowagg::assemble_flows(packets));
    REQUIRE(rows.size() == expected.size());
    REQUIRE(rows.size() == 1);
    for (std::size_t i = 0; i < 34; ++i) CHECK(rows[0].values[i] == doctest::Approx(expected[0].values[i]));
    CHECK_FALSE(rows[0].num_flows.has_value());
}

TEST_CASE("end-to-end workflow") {
    Workspace ws;
    std::string out;
    REQUIRE(run("synth --scenario mimicking --seed 3 --benign-flows 300 --attack-flows 100 --out " + (ws / "s.pcap") +
                " --labels " + (ws / "l.csv")) == 0);
    REQUIRE(run("extract --pcap " + (ws / "s.pcap") + " --labels " + (ws / "l.csv") + " --out " + (ws / "f.csv")) == 0);
    REQUIRE(run("aggregate --in " + (ws / "f.csv") + " --out " + (ws / "a.csv") + " --window none") == 0);
    CHECK(run("rfe --in " + (ws / "f.csv") + " --k 5", &out) == 1);  // not aggregated yet
    CHECK(out.find("aggregate") != std::string::npos);
    REQUIRE(run("rfe --in " + (ws / "a.csv") + " --k 3 --out " + (ws / "sel.json"), &out) == 0);
    CHECK(std::count(out.begin(), out.end(), '\n') == 3);
    REQUIRE(run("train --in " + (ws / "a.csv") + " --selection " + (ws / "sel.json") + " --model " + (ws / "m.json")) == 0);
    REQUIRE(run("eval --model " + (ws / "m.json") + " --in " + (ws / "a.csv") + " --report " + (ws / "r.json")) == 0);
    CHECK(nlohmann::json::parse(slurp(ws / "r.json"))["classes"].size() == 2);

    // Split by label for the design-driven evaluation and zero-day commands.
    const auto rows = flowagg::read_flow_csv(fs::path(ws / "a.csv"));
    std::vector<flowagg::FlowFeatureVector> benign, attack;
    for (const auto& r : rows) (r.label == "benign" ? benign : attack).push_back(r);
    flowagg::write_flow_csv(fs::path(ws / "benign.csv"), benign);
    flowagg::write_flow_csv(fs::path(ws / "attack.csv"), attack);
    REQUIRE(run("eval --design binary --benign " + (ws / "benign.csv") + " --attack slowloris=" + (ws / "attack.csv") +
                " --with-aggregation --report " + (ws / "e.json"), &out) == 0);
    CHECK(out.find("slowloris") != std::string::npos);
    CHECK(run("eval --design three_class --benign " + (ws / "benign.csv") + " --attack slowloris=" +
              (ws / "attack.csv")) == 1);
    REQUIRE(run("zeroday fit --benign " + (ws / "benign.csv") + " --model " + (ws / "z.json")) == 0);
    REQUIRE(run("zeroday detect --model " + (ws / "z.json") + " --in " + (ws / "attack.csv") +
                " --thresholds 0.15,0.1,0.05 --report " + (ws / "zr.json")) == 0);
    const auto zr = nlohmann::json::parse(slurp(ws / "zr.json"));
    CHECK(zr["thresholds"].size() == 3);
    CHECK(run("zeroday detect --model " + (ws / "z.json") + " --in " + (ws / "attack.csv") + " --thresholds 1.5") == 1);
}

TEST_CASE("synth accepts a scenario file") {
    Workspace ws;
    {
        std::ofstream s(ws / "scn.ini");
        s << "[scenario]\nseed = 2\nduration = 100\n[class.benign]\nsources = 3\n";
    }
    REQUIRE(run("synth --scenario " + (ws / "scn.ini") + " --out " + (ws / "a.pcap")) == 0);
    REQUIRE(run("synth --scenario " + (ws / "scn.ini") + " --out " + (ws / "b.pcap")) == 0);
    CHECK(slurp(ws / "a.pcap") == slurp(ws / "b.pcap"));
    CHECK(run("synth --scenario nonesuch --out " + (ws / "c.pcap")) == 1);
}
