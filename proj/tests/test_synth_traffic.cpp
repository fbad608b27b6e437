#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "flowagg/errors.hpp"
#include "flowagg/flow_aggregation.hpp"
#include "flowagg/flow_features.hpp"
#include "flowagg/synth_traffic.hpp"

using namespace flowagg;

namespace {

std::vector<double> column(const std::vector<FlowFeatureVector>& rows, const std::string& label, std::size_t col) {
    std::vector<double> out;
    for (const auto& r : rows)
        if (r.label == label) out.push_back(r.values[col]);
    std::sort(out.begin(), out.end());
    return out;
}

double quantile(const std::vector<double>& sorted, double q) {
    return sorted[static_cast<std::size_t>(q * (sorted.size() - 1))];
}

}  // namespace

TEST_CASE("one benign flow gives one label") {
    ScenarioSpec spec;
    spec.seed = 1;
    TrafficClass c = benign_class(1);
    c.flows_per_source_min = c.flows_per_source_max = 1;
    spec.classes = {c};
    const auto cap = generate(spec);
    REQUIRE(cap.manifest.size() == 1);
    CHECK(cap.manifest[0].label == "benign");
    CHECK(assemble_flows(cap.packets).size() == 1);
}

TEST_CASE("generation is deterministic in the seed") {
    ScenarioScale scale{300, 80};
    const auto a = encode_pcap(generate(builtin_scenario("five_class", 9, scale)).packets);
    const auto b = encode_pcap(generate(builtin_scenario("five_class", 9, scale)).packets);
    const auto c = encode_pcap(generate(builtin_scenario("five_class", 10, scale)).packets);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("every flow matches exactly one manifest entry and packets are ordered") {
    ScenarioScale scale{400, 100};
    const auto cap = generate(builtin_scenario("five_class", 2, scale));
    for (std::size_t i = 1; i < cap.packets.size(); ++i) CHECK(cap.packets[i - 1].timestamp <= cap.packets[i].timestamp);
    auto rows = extract_all(assemble_flows(cap.packets));
    CHECK(rows.size() == cap.manifest.size());
    CHECK(apply_labels(rows, cap.manifest) == 0);
    std::map<std::string, std::size_t> counts;
    for (const auto& r : rows) ++counts[r.label];
    CHECK(counts.size() == 5);
    CHECK(counts["portscan"] > 0);
    CHECK(counts["hulk"] > 0);
}

TEST_CASE("large capture parses with nothing skipped") {
    const auto cap = generate(builtin_scenario("mimicking", 4));
    CHECK(cap.packets.size() >= 10000);
    const auto parsed = parse_pcap(encode_pcap(cap.packets));
    CHECK(parsed.skipped == 0);
    CHECK(parsed.packets == cap.packets);
}

TEST_CASE("mimicking flows look benign per flow, not per bundle") {
    const auto cap = generate(builtin_scenario("mimicking", 5));
    auto rows = extract_all(assemble_flows(cap.packets));
    apply_labels(rows, cap.manifest);
    rows = aggregate(std::move(rows));

    for (auto stat : {DirectionStat::PktLenMean, DirectionStat::IatMean, DirectionStat::PktCount}) {
        for (auto dir : {Direction::Fwd, Direction::Bwd}) {
            const auto b = column(rows, "benign", feature_index(dir, stat));
            const auto m = column(rows, "slowloris", feature_index(dir, stat));
            // Interquartile ranges overlap.
            CHECK(quantile(b, 0.25) <= quantile(m, 0.75));
            CHECK(quantile(m, 0.25) <= quantile(b, 0.75));
        }
    }
    double benign_max_flows = 0, attack_min_flows = 1e9, benign_min_delta = 1e9, attack_max_delta = 0;
    for (const auto& r : rows) {
        if (r.label == "benign") {
            benign_max_flows = std::max(benign_max_flows, *r.num_flows);
            if (*r.num_flows > 1) benign_min_delta = std::min(benign_min_delta, *r.src_ports_delta);
        } else {
            attack_min_flows = std::min(attack_min_flows, *r.num_flows);
            attack_max_delta = std::max(attack_max_delta, *r.src_ports_delta);
        }
    }
    CHECK(benign_max_flows < attack_min_flows);
    CHECK(attack_max_delta < benign_min_delta);
}

TEST_CASE("label manifest round trip") {
    const auto cap = generate(builtin_scenario("four_hosts", 0));
    const auto path = std::filesystem::temp_directory_path() / "flowagg_labels.csv";
    write_label_manifest(path, cap.manifest);
    const auto back = read_label_manifest(path);
    std::filesystem::remove(path);
    REQUIRE(back.size() == cap.manifest.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].initiator == cap.manifest[i].initiator);
        CHECK(back[i].responder == cap.manifest[i].responder);
        CHECK(back[i].start_time == doctest::Approx(cap.manifest[i].start_time).epsilon(1e-15));
        CHECK(back[i].label == cap.manifest[i].label);
    }
}

TEST_CASE("scenario file") {
    const auto path = std::filesystem::temp_directory_path() / "flowagg_scenario.ini";
    {
        std::ofstream out(path);
        out << "[scenario]\nseed = 3\nduration = 300\n\n"
               "[class.benign]\nsources = 10\nflows_per_source_min = 1\nflows_per_source_max = 3\n\n"
               "[class.slowloris]\nsources = 1\nflows_per_source_min = 40\nflows_per_source_max = 40\n"
               "port_pattern = sequential-increment\nport_step = 3\nservers = 1\nflow_rate = 0.5\n";
    }
    const auto spec = load_scenario_file(path);
    CHECK(spec.seed == 3);
    CHECK(spec.duration == 300.0);
    REQUIRE(spec.classes.size() == 2);
    CHECK(spec.classes[1].label == "slowloris");
    CHECK(spec.classes[1].port_pattern == PortPattern::SequentialIncrement);
    const auto cap = generate(spec);
    const auto bundles = bundle_flows(std::span<const BiFlow>(assemble_flows(cap.packets)));
    const auto attacker = std::find_if(bundles.begin(), bundles.end(), [](const Bundle& b) { return b.num_flows == 40; });
    REQUIRE(attacker != bundles.end());
    CHECK(attacker->src_ports_delta == 3.0);

    {
        std::ofstream out(path);
        out << "[class.benign]\nsources = 0\n";
    }
    CHECK_THROWS_AS(generate(load_scenario_file(path)), ValidationError);
    {
        std::ofstream out(path);
        out << "[class.benign]\ncolour = blue\n";
    }
    CHECK_THROWS_AS(load_scenario_file(path), ValidationError);
    std::filesystem::remove(path);
}

TEST_CASE("infeasible specs and unknown scenarios") {
    CHECK_THROWS_AS(builtin_scenario("nonesuch", 0), ValidationError);
    ScenarioSpec spec;
    CHECK_THROWS_AS(generate(spec), ValidationError);
    spec.classes = {benign_class(10)};
    spec.classes[0].flow_rate = 0.0;
    CHECK_THROWS_AS(generate(spec), ValidationError);
    CHECK_THROWS_AS(write_pcap({}, "/nonexistent/dir/out.pcap"), IoError);
}
