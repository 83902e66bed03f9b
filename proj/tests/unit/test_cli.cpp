#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stvs/cli.hpp"
#include "stvs/errors.hpp"
#include "stvs/ingest.hpp"
#include "stvs/synth.hpp"

using namespace stvs;
using nlohmann::json;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string data_path(const std::string& name) {
    return std::string(STVS_TEST_DATA_DIR) + "/" + name;
}

std::string scenario_csv(synth::ScenarioKind kind, const synth::ScenarioParams& p = {}) {
    std::ostringstream s;
    ingest::write_trajectory(s, synth::synth_scenario(kind, p).trajectory);
    return s.str();
}

std::string write_file(const std::string& name, const std::string& text) {
    const auto path = data_path(name);
    std::ofstream(path) << text;
    return path;
}

std::vector<json> json_lines(const std::string& text) {
    std::vector<json> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            out.push_back(json::parse(line));
        }
    }
    return out;
}

json without_latency(json doc) {
    doc.erase("latency_s");
    doc["config"].erase("stream");
    return doc;
}

cli::RunConfig stream_config(double t0) {
    cli::RunConfig cfg;
    cfg.fault_clear_time = t0;
    cfg.stream = true;
    return cfg;
}

}  // namespace

TEST_CASE("thresholds command prints the critical IMF index", "[cli]") {
    const auto r = run_cli({"thresholds", "--bins", "20", "--lo", "0", "--hi", "1.5", "--gamma2", "10"});
    REQUIRE(r.code == 0);
    const auto doc = json::parse(r.out);
    CHECK_THAT(doc["imf_critical"].get<double>(), WithinAbs(2.09, 0.05));
    CHECK(doc["critical_bins"] == json({11, 12, 13}));
}

TEST_CASE("assess writes a JSON assessment", "[cli]") {
    const auto path = write_file("cli_mixed.csv", scenario_csv(synth::ScenarioKind::mixed));
    const auto r = run_cli({"assess", "--in", path, "--t0", "1.1", "--window", "3.0"});
    REQUIRE(r.code == 0);
    const auto doc = json::parse(r.out);
    CHECK(doc.contains("oscillation"));
    CHECK(doc["oscillation"].contains("index"));
    CHECK(doc["oscillation"].contains("threshold"));
    CHECK(doc["oscillation"].contains("margin"));
    CHECK(doc["oscillation"].contains("class"));
    CHECK(doc["generators"].size() == 3);
    for (const auto& g : doc["generators"]) {
        for (const char* key : {"id", "index", "threshold", "margin", "class", "delta_r0"}) {
            CHECK(g.contains(key));
        }
    }
    CHECK(doc["config"]["window"] == 3.0);
    CHECK(doc["config"]["fault_clear_time"] == 1.1);
    CHECK(doc.contains("latency_s"));
}

TEST_CASE("output file flag", "[cli]") {
    const auto out = data_path("cli_thresholds.json");
    const auto r = run_cli({"thresholds", "--out", out});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream f(out);
    CHECK(json::parse(f).contains("imf_critical"));
}

TEST_CASE("NaN input exits with a validation code", "[cli]") {
    const auto path = write_file("cli_nan.csv", "time,V:A\n0,1\n0.02,nan\n0.04,1\n");
    const auto r = run_cli({"assess", "--in", path, "--t0", "0.02"});
    CHECK(r.code == 1);
    CHECK_THAT(r.err, ContainsSubstring("line 3"));
    CHECK(r.out.empty());
}

TEST_CASE("usage errors", "[cli]") {
    CHECK(run_cli({"assess", "--bogus"}).code == 1);
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"assess", "--in", data_path("does-not-exist.csv"), "--t0", "1"}).code == 1);
    CHECK(run_cli({"thresholds", "--bins", "20", "--hi", "0.9"}).code == 1);
}

TEST_CASE("computation failures exit with code two", "[cli]") {
    // A cap that cannot be reached by any terminal voltage.
    const auto gens = write_file("cli_unreachable.ini", "[B1]\nxd_prime = 0.3\np_active = 0.8\npickup = (0.01, 20)\n");
    synth::ScenarioParams p;
    p.reactive_power = true;
    const auto path = write_file("cli_q.csv", scenario_csv(synth::ScenarioKind::fast_recovery, p));
    const auto r = run_cli({"assess", "--in", path, "--t0", "1.1", "--gen-config", gens});
    CHECK(r.code == 2);
    CHECK_THAT(r.err, ContainsSubstring("error"));
}

TEST_CASE("synth command writes readable CSV", "[cli]") {
    const auto r = run_cli({"synth", "stalled-recovery", "--seed", "3"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    ingest::TrajectorySchema schema;
    schema.fault_clear_time = 1.1;
    const auto t = ingest::read_trajectory(in, schema);
    CHECK(t.channel_count() == 3);
    CHECK(t.channel(0).voltage.back() == 0.7 + 0.01 * std::sin(2 * 3.141592653589793 * 1.5 * 3.0));
}

TEST_CASE("decompose and exponents commands", "[cli]") {
    const auto path = write_file("cli_stable.csv", scenario_csv(synth::ScenarioKind::mixed));
    const auto d = run_cli({"decompose", "--in", path, "--t0", "1.1"});
    REQUIRE(d.code == 0);
    CHECK_THAT(d.out.substr(0, d.out.find('\n')), ContainsSubstring("R:B1"));
    const auto e = run_cli({"exponents", "--in", path, "--t0", "1.1"});
    REQUIRE(e.code == 0);
    CHECK_THAT(e.out, ContainsSubstring("oscillation,"));
    CHECK_THAT(e.out, ContainsSubstring("B1,"));
}

TEST_CASE("config files and generator sections", "[cli]") {
    cli::RunConfig cfg;
    cli::apply_config_text("# comment\nwindow_duration = 2.5\ngamma2 = 12\n", cfg);
    CHECK(cfg.assess.window == 2.5);
    CHECK(cfg.assess.gamma2 == 12.0);
    CHECK_THROWS_AS(cli::apply_config_text("nonsense = 1\n", cfg), ValidationError);
    const auto gens = cli::parse_generator_config(
        "[G1]\nxd_prime = 0.3\np_active = 0.8\npickup = (1.13, 20)\nlvrt = (0.85, 1.5)\n[G2]\nlvrt = (0.9, 20)\n");
    REQUIRE(gens.size() == 2);
    CHECK(gens[0].pickups.size() == 1);
    CHECK(gens[0].pickups[0].first == 1.13);
    CHECK(gens[0].lvrt[0].v == 0.85);
    CHECK(gens[1].lvrt[0].t == 20.0);
}

TEST_CASE("streamed stable oscillation", "[cli]") {
    std::istringstream in(scenario_csv(synth::ScenarioKind::stable_osc));
    std::ostringstream out, err;
    REQUIRE(cli::stream_assess(in, out, err, stream_config(1.1), {}) == 0);
    const auto lines = json_lines(out.str());
    CHECK(lines.size() >= 25);
    REQUIRE_FALSE(lines.empty());
    CHECK(lines.front()["latency_s"].get<double>() <= 0.6 + 1e-9);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        CHECK(lines[i]["latency_s"].get<double>() > lines[i - 1]["latency_s"].get<double>());
    }
}

TEST_CASE("empty stream writes nothing", "[cli]") {
    std::istringstream in("");
    std::ostringstream out, err;
    CHECK(cli::stream_assess(in, out, err, stream_config(1.0), {}) == 0);
    CHECK(out.str().empty());
}

TEST_CASE("out-of-order rows are reported and skipped", "[cli]") {
    auto csv = scenario_csv(synth::ScenarioKind::stable_osc);
    const auto pos = csv.find("\n1.5,");
    REQUIRE(pos != std::string::npos);
    csv.insert(pos + 1, "0.5,1,1,1\n");
    std::istringstream in(csv);
    std::ostringstream out, err;
    CHECK(cli::stream_assess(in, out, err, stream_config(1.1), {}) == 1);
    CHECK_THAT(err.str(), ContainsSubstring("out-of-order"));
    CHECK(json_lines(out.str()).size() >= 25);
}

TEST_CASE("batch equals the final streamed assessment", "[cli][property]") {
    const auto csv = scenario_csv(synth::ScenarioKind::mixed);
    std::istringstream in(csv);
    std::ostringstream out, err;
    auto cfg = stream_config(1.1);
    REQUIRE(cli::stream_assess(in, out, err, cfg, {}) == 0);
    const auto lines = json_lines(out.str());
    REQUIRE_FALSE(lines.empty());

    const auto path = write_file("cli_batch.csv", csv);
    const auto r = run_cli({"assess", "--in", path, "--t0", "1.1"});
    REQUIRE(r.code == 0);
    CHECK(without_latency(json::parse(r.out)).dump() == without_latency(lines.back()).dump());
}
