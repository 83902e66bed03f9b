#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include <fmt/format.h>

#include "stvs/cli.hpp"
#include "stvs/errors.hpp"
#include "stvs/numfmt.hpp"

namespace stvs::cli {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError(fmt::format("cannot open '{}'", path));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double number(std::string_view key, std::string_view value) {
    const auto v = parse_double(value);
    if (!v || !std::isfinite(*v)) {
        throw ValidationError(fmt::format("config key '{}': '{}' is not a number", key, value));
    }
    return *v;
}

double positive(std::string_view key, std::string_view value) {
    const double v = number(key, value);
    if (!(v > 0.0)) {
        throw ValidationError(fmt::format("config key '{}' must be positive, got {}", key, v));
    }
    return v;
}

std::size_t count(std::string_view key, std::string_view value) {
    const double v = number(key, value);
    if (!(v >= 1.0) || v != std::floor(v)) {
        throw ValidationError(fmt::format("config key '{}' must be a positive integer, got '{}'", key, value));
    }
    return static_cast<std::size_t>(v);
}

bool boolean(std::string_view key, std::string_view value) {
    if (value == "1" || value == "true" || value == "yes") {
        return true;
    }
    if (value == "0" || value == "false" || value == "no") {
        return false;
    }
    throw ValidationError(fmt::format("config key '{}' expects a boolean, got '{}'", key, value));
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

const std::unordered_map<std::string, Setter>& setters() {
    static const std::unordered_map<std::string, Setter> table = {
        {"fault_clear_time", [](RunConfig& c, auto k, auto v) { c.fault_clear_time = number(k, v); }},
        {"window_duration", [](RunConfig& c, auto k, auto v) { c.assess.window = positive(k, v); }},
        {"lookback", [](RunConfig& c, auto k, auto v) { c.assess.lookback = positive(k, v); }},
        {"bins", [](RunConfig& c, auto k, auto v) { c.assess.imf_grid.bins = count(k, v); }},
        {"lo", [](RunConfig& c, auto k, auto v) { c.assess.imf_grid.lo = number(k, v); }},
        {"hi", [](RunConfig& c, auto k, auto v) { c.assess.imf_grid.hi = number(k, v); }},
        {"residual_bins", [](RunConfig& c, auto k, auto v) { c.assess.residual_grid.bins = count(k, v); }},
        {"residual_lo", [](RunConfig& c, auto k, auto v) { c.assess.residual_grid.lo = number(k, v); }},
        {"residual_hi", [](RunConfig& c, auto k, auto v) { c.assess.residual_grid.hi = number(k, v); }},
        {"gamma2", [](RunConfig& c, auto k, auto v) { c.assess.gamma2 = positive(k, v); }},
        {"gamma1", [](RunConfig& c, auto k, auto v) { c.assess.gamma1 = positive(k, v); }},
        {"x_star", [](RunConfig& c, auto k, auto v) { c.assess.x_star = number(k, v); }},
        {"imf_band_lo", [](RunConfig& c, auto k, auto v) { c.assess.band_lo = number(k, v); }},
        {"imf_band_hi", [](RunConfig& c, auto k, auto v) { c.assess.band_hi = positive(k, v); }},
        {"oscillation_epsilon", [](RunConfig& c, auto k, auto v) { c.assess.oscillation_epsilon = number(k, v); }},
        {"epsilon", [](RunConfig& c, auto k, auto v) { c.assess.recovery_epsilon = number(k, v); }},
        {"eq0", [](RunConfig& c, auto k, auto v) { c.assess.eq0 = positive(k, v); }},
        {"embedding_m", [](RunConfig& c, auto k, auto v) { c.assess.embedding.m = count(k, v); }},
        {"tau", [](RunConfig& c, auto k, auto v) { c.assess.embedding.tau = count(k, v); }},
        {"theiler", [](RunConfig& c, auto k, auto v) {
             const double t = number(k, v);
             if (t < 0.0 || t != std::floor(t)) {
                 throw ValidationError("config key 'theiler' must be a non-negative integer");
             }
             c.assess.embedding.theiler = static_cast<std::size_t>(t);
         }},
        {"sift_sd", [](RunConfig& c, auto k, auto v) { c.assess.sift.sd_threshold = positive(k, v); }},
        {"sift_max_iterations", [](RunConfig& c, auto k, auto v) { c.assess.sift.max_iterations = static_cast<int>(count(k, v)); }},
        {"sift_hard_cap", [](RunConfig& c, auto k, auto v) { c.assess.sift.hard_cap = static_cast<int>(count(k, v)); }},
        {"max_imfs", [](RunConfig& c, auto k, auto v) { c.assess.sift.max_imfs = static_cast<int>(count(k, v)); }},
        {"directions", [](RunConfig& c, auto k, auto v) { c.assess.sift.directions = static_cast<int>(count(k, v)); }},
        {"gamma_lo", [](RunConfig& c, auto k, auto v) { c.assess.search.gamma_lo = positive(k, v); }},
        {"gamma_hi", [](RunConfig& c, auto k, auto v) { c.assess.search.gamma_hi = positive(k, v); }},
        {"gamma_points", [](RunConfig& c, auto k, auto v) { c.assess.search.gamma_points = count(k, v); }},
        {"x_star_lo", [](RunConfig& c, auto k, auto v) { c.assess.search.x_star_lo = number(k, v); }},
        {"x_star_hi", [](RunConfig& c, auto k, auto v) { c.assess.search.x_star_hi = number(k, v); }},
        {"x_star_points", [](RunConfig& c, auto k, auto v) { c.assess.search.x_star_points = count(k, v); }},
        {"report_interval", [](RunConfig& c, auto k, auto v) { c.report_interval = positive(k, v); }},
        {"first_report", [](RunConfig& c, auto k, auto v) { c.first_report = positive(k, v); }},
        // scenario synthesis
        {"dt", [](RunConfig& c, auto k, auto v) { c.scenario.dt = positive(k, v); }},
        {"prefault", [](RunConfig& c, auto k, auto v) { c.scenario.prefault = number(k, v); }},
        {"fault", [](RunConfig& c, auto k, auto v) { c.scenario.fault = number(k, v); }},
        {"post", [](RunConfig& c, auto k, auto v) { c.scenario.post = positive(k, v); }},
        {"channels", [](RunConfig& c, auto k, auto v) { c.scenario.channels = count(k, v); }},
        {"v_pre", [](RunConfig& c, auto k, auto v) { c.scenario.v_pre = positive(k, v); }},
        {"fault_level", [](RunConfig& c, auto k, auto v) { c.scenario.fault_level = positive(k, v); }},
        {"amplitude", [](RunConfig& c, auto k, auto v) { c.scenario.amplitude = number(k, v); }},
        {"frequency", [](RunConfig& c, auto k, auto v) { c.scenario.frequency = number(k, v); }},
        {"decay", [](RunConfig& c, auto k, auto v) { c.scenario.decay = number(k, v); }},
        {"growth", [](RunConfig& c, auto k, auto v) { c.scenario.growth = number(k, v); }},
        {"dip", [](RunConfig& c, auto k, auto v) { c.scenario.dip = number(k, v); }},
        {"recovery", [](RunConfig& c, auto k, auto v) { c.scenario.recovery = number(k, v); }},
        {"level", [](RunConfig& c, auto k, auto v) { c.scenario.level = positive(k, v); }},
        {"wobble", [](RunConfig& c, auto k, auto v) { c.scenario.wobble = number(k, v); }},
        {"reactive_power", [](RunConfig& c, auto k, auto v) { c.scenario.reactive_power = boolean(k, v); }},
        {"k1", [](RunConfig& c, auto k, auto v) { c.scenario.k1 = number(k, v); }},
        {"k2", [](RunConfig& c, auto k, auto v) { c.scenario.k2 = number(k, v); }},
        {"noise", [](RunConfig& c, auto k, auto v) { c.scenario.noise = number(k, v); }},
    };
    return table;
}

std::pair<double, double> parse_pair(std::string_view key, std::string_view value, std::size_t line) {
    value = trim(value);
    if (value.size() < 2 || value.front() != '(' || value.back() != ')') {
        throw ValidationError(fmt::format("line {}: '{}' expects (value, seconds)", line, key));
    }
    value = value.substr(1, value.size() - 2);
    const auto comma = value.find(',');
    if (comma == std::string_view::npos) {
        throw ValidationError(fmt::format("line {}: '{}' expects two comma-separated numbers", line, key));
    }
    const auto a = parse_double(value.substr(0, comma));
    const auto b = parse_double(value.substr(comma + 1));
    if (!a || !b) {
        throw ValidationError(fmt::format("line {}: malformed pair for '{}'", line, key));
    }
    return {*a, *b};
}

}  // namespace

void apply_config_text(const std::string& text, RunConfig& config) {
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto s = trim(std::string_view(raw).substr(0, raw.find('#')));
        if (s.empty()) {
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError(fmt::format("config line {}: expected key = value", line));
        }
        const std::string key(trim(s.substr(0, eq)));
        const auto value = trim(s.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            throw ValidationError(fmt::format("config line {}: unknown key '{}'", line, key));
        }
        it->second(config, key, value);
    }
}

void apply_config_file(const std::string& path, RunConfig& config) {
    apply_config_text(read_file(path), config);
    config.config_file = path;
}

std::vector<indices::GeneratorConfig> parse_generator_config(const std::string& text) {
    std::vector<indices::GeneratorConfig> gens;
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto s = trim(std::string_view(raw).substr(0, raw.find('#')));
        if (s.empty()) {
            continue;
        }
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3) {
                throw ValidationError(fmt::format("generator config line {}: malformed section header", line));
            }
            indices::GeneratorConfig g;
            g.id = std::string(trim(s.substr(1, s.size() - 2)));
            if (std::any_of(gens.begin(), gens.end(), [&](const auto& o) { return o.id == g.id; })) {
                throw ValidationError(fmt::format("generator config line {}: duplicate section '{}'", line, g.id));
            }
            gens.push_back(std::move(g));
            continue;
        }
        if (gens.empty()) {
            throw ValidationError(fmt::format("generator config line {}: entry outside a [generator] section", line));
        }
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError(fmt::format("generator config line {}: expected key = value", line));
        }
        const auto key = trim(s.substr(0, eq));
        const auto value = trim(s.substr(eq + 1));
        auto& g = gens.back();
        if (key == "xd_prime") {
            g.xd_prime = number(key, value);
            if (g.xd_prime < 0.0) {
                throw ValidationError(fmt::format("generator config line {}: xd_prime must be >= 0", line));
            }
        } else if (key == "p_active") {
            g.p_active = number(key, value);
        } else if (key == "pickup") {
            const auto [e, t] = parse_pair(key, value, line);
            if (!(e > 0.0) || !(t > 0.0)) {
                throw ValidationError(fmt::format("generator config line {}: pickup needs E > 0 and t > 0", line));
            }
            g.pickups.emplace_back(e, t);
        } else if (key == "lvrt") {
            const auto [v, t] = parse_pair(key, value, line);
            if (!(v > 0.0) || !(t > 0.0)) {
                throw ValidationError(fmt::format("generator config line {}: lvrt needs V > 0 and t > 0", line));
            }
            g.lvrt.push_back({v, t});
        } else {
            throw ValidationError(fmt::format("generator config line {}: unknown key '{}'", line, key));
        }
    }
    return gens;
}

std::vector<indices::GeneratorConfig> load_generator_config(const std::string& path) {
    return parse_generator_config(read_file(path));
}

}  // namespace stvs::cli
