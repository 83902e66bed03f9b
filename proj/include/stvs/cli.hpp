#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stvs/indices.hpp"
#include "stvs/synth.hpp"

namespace stvs::cli {

struct RunConfig {
    std::string input;       // "-" or empty reads standard input where allowed
    std::string output;      // empty writes standard output
    std::string gen_config;
    std::string config_file;
    std::optional<double> fault_clear_time;
    bool stream = false;
    double report_interval = 0.1;
    double first_report = 0.5;
    std::uint64_t seed = 1;
    indices::AssessConfig assess;
    synth::ScenarioParams scenario;
};

/// Applies `key = value` lines ('#' comments) on top of `config`.
void apply_config_text(const std::string& text, RunConfig& config);
void apply_config_file(const std::string& path, RunConfig& config);

/// Parses generator sections:
///   [G1]
///   xd_prime = 0.3
///   p_active = 0.8
///   pickup = (1.13, 20)
///   lvrt = (0.85, 1.5)
std::vector<indices::GeneratorConfig> parse_generator_config(const std::string& text);
std::vector<indices::GeneratorConfig> load_generator_config(const std::string& path);

nlohmann::json config_json(const RunConfig& config);
nlohmann::json assessment_json(const indices::StabilityAssessment& a, const RunConfig& config, double latency_s);

/// Streams rows from `in`, writing one JSON line per report. Returns the exit code.
int stream_assess(std::istream& in, std::ostream& out, std::ostream& err, const RunConfig& config,
                  const std::vector<indices::GeneratorConfig>& generators);

/// Entry point; 0 on success, 1 on validation errors, 2 on computation errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stvs::cli
