#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "stvs/cli.hpp"
#include "stvs/emd.hpp"
#include "stvs/errors.hpp"
#include "stvs/numfmt.hpp"
#include "stvs/simd/distance.hpp"

namespace stvs::cli {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

json grid_json(const distribution::Grid& g) {
    return {{"bins", g.bins}, {"lo", g.lo}, {"hi", g.hi}};
}

json tuning_json(const oel::TuningResult& t) {
    return {{"gamma1", t.gamma1}, {"x_star", t.x_star}, {"d_s1", t.d_s1},         {"d_s2", t.d_s2},
            {"f_star", t.f_star}, {"epsilon", t.epsilon}, {"d_critical_r", t.d_critical_r}};
}

std::string_view status_name(oel::SignalStatus s) {
    switch (s) {
        case oel::SignalStatus::ok: return "ok";
        case oel::SignalStatus::trivially_safe: return "trivially-safe";
        case oel::SignalStatus::trivially_tripping: return "trivially-tripping";
    }
    return "ok";
}

void configure_logging(std::ostream& err) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto logger = std::make_shared<spdlog::logger>("stvs", sink);
    logger->set_pattern("%l: %v");
    spdlog::level::level_enum level = spdlog::level::warn;
    if (const char* env = std::getenv("STVS_LOG")) {
        const std::string_view v(env);
        if (v == "error") level = spdlog::level::err;
        else if (v == "warn") level = spdlog::level::warn;
        else if (v == "info") level = spdlog::level::info;
        else if (v == "debug") level = spdlog::level::debug;
    }
    logger->set_level(level);
    spdlog::set_default_logger(logger);
}

// Keeps the logger bound to `err` only for the duration of one run.
class ScopedLogger {
public:
    explicit ScopedLogger(std::ostream& err) : previous_(spdlog::default_logger()) { configure_logging(err); }
    ~ScopedLogger() { spdlog::set_default_logger(previous_); }
    ScopedLogger(const ScopedLogger&) = delete;
    ScopedLogger& operator=(const ScopedLogger&) = delete;

private:
    std::shared_ptr<spdlog::logger> previous_;
};

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) {
                throw ValidationError(fmt::format("cannot write '{}'", path));
            }
            stream_ = &file_;
        }
    }
    std::ostream& get() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

ingest::TrajectorySchema schema_for(const RunConfig& cfg) {
    ingest::TrajectorySchema schema;
    schema.fault_clear_time = cfg.fault_clear_time;
    return schema;
}

ingest::VoltageTrajectory load_input(const RunConfig& cfg) {
    if (cfg.input.empty() || cfg.input == "-") {
        return ingest::read_trajectory(std::cin, schema_for(cfg));
    }
    return ingest::load_trajectory(cfg.input, schema_for(cfg));
}

std::vector<indices::GeneratorConfig> load_generators(const RunConfig& cfg) {
    return cfg.gen_config.empty() ? std::vector<indices::GeneratorConfig>{} : load_generator_config(cfg.gen_config);
}

int cmd_thresholds(const RunConfig& cfg, std::ostream& out) {
    const auto& grid = cfg.assess.imf_grid;
    const double d = indices::imf_threshold(grid, cfg.assess.gamma2);
    const std::size_t c = indices::imf_threshold_centre_bin(grid);
    const auto ref = distribution::gompertz_reference(cfg.assess.gamma2, 1.0, grid);
    json doc = {{"imf_critical", d},
                {"grid", grid_json(grid)},
                {"gamma2", cfg.assess.gamma2},
                {"critical_bins", {c - 1, c, c + 1}},
                {"bin_edges", ref.bin_edges},
                {"reference", ref.probabilities}};
    out << doc.dump(2) << '\n';
    return 0;
}

int cmd_assess(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto gens = load_generators(cfg);
    if (cfg.stream) {
        if (cfg.input.empty() || cfg.input == "-") {
            return stream_assess(std::cin, out, err, cfg, gens);
        }
        std::ifstream in(cfg.input);
        if (!in) {
            throw ValidationError(fmt::format("cannot open '{}'", cfg.input));
        }
        return stream_assess(in, out, err, cfg, gens);
    }
    const auto traj = load_input(cfg);
    const auto a = indices::assess(traj, cfg.assess, gens);
    out << assessment_json(a, cfg, a.window_s).dump(2) << '\n';
    return 0;
}

int cmd_decompose(const RunConfig& cfg, std::ostream& out) {
    const auto traj = load_input(cfg);
    const auto window = ingest::extract_post_fault_window(traj, cfg.assess.window);
    const auto decomp = emd::filter_imfs_by_frequency(emd::decompose(window, cfg.assess.sift), cfg.assess.band_lo,
                                                      cfg.assess.band_hi);
    out << "t";
    for (std::size_t c = 0; c < window.channel_count(); ++c) {
        const auto& id = window.channel(c).id;
        out << ",V:" << id;
        for (std::size_t k = 0; k < decomp.imfs[c].size(); ++k) {
            out << ",IMF" << (k + 1) << ':' << id;
        }
        out << ",R:" << id;
    }
    out << '\n';
    for (std::size_t i = 0; i < window.length(); ++i) {
        out << format_double(window.time_at(i));
        for (std::size_t c = 0; c < window.channel_count(); ++c) {
            out << ',' << format_double(window.channel(c).voltage[i]);
            for (const auto& imf : decomp.imfs[c]) {
                out << ',' << format_double(imf[i]);
            }
            out << ',' << format_double(decomp.residual[c][i]);
        }
        out << '\n';
    }
    return 0;
}

void write_series(std::ostream& out, const std::string& target, const lyapunov::ExponentSeries& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << target << ',' << s.k_offsets[i] << ',' << format_double(static_cast<double>(s.k_offsets[i]) * s.dt)
            << ',' << format_double(s.lambdas[i]) << ',' << format_double(s.divergence_factors[i]) << '\n';
    }
}

int cmd_exponents(const RunConfig& cfg, std::ostream& out) {
    const auto traj = load_input(cfg);
    const auto v_pre = indices::prefault_voltage(traj, cfg.assess);
    const auto window = ingest::extract_post_fault_window(traj, cfg.assess.window);
    const auto decomp = emd::decompose(window, cfg.assess.sift);
    const auto retained = emd::filter_imfs_by_frequency(decomp, cfg.assess.band_lo, cfg.assess.band_hi);
    out << "target,k,t,lambda,divergence_factor\n";
    const auto osc = indices::oscillation_index(retained, cfg.assess.gamma2, cfg.assess.imf_grid, cfg.assess.embedding);
    if (osc.tag.empty()) {
        write_series(out, "oscillation", osc.exponents);
    }
    for (std::size_t c = 0; c < window.channel_count(); ++c) {
        const double eq0 = cfg.assess.eq0.value_or(v_pre[c]);
        const auto& r = decomp.residual[c];
        if (std::abs(r[0] - eq0) <= lyapunov::kDeviationFloor) {
            continue;
        }
        write_series(out, "R:" + window.channel(c).id, lyapunov::fsle_residual_series(r, eq0, 0, window.dt()));
    }
    return 0;
}

int cmd_tune(const RunConfig& cfg, std::ostream& out) {
    if (cfg.gen_config.empty()) {
        throw ValidationError("tune needs --gen-config");
    }
    const auto gens = load_generators(cfg);
    const auto traj = load_input(cfg);
    const auto v_pre = indices::prefault_voltage(traj, cfg.assess);
    const auto window = ingest::extract_post_fault_window(traj, cfg.assess.window);
    const auto decomp = emd::decompose(window, cfg.assess.sift);
    json doc = json::array();
    for (const auto& g : gens) {
        std::size_t c = window.channel_count();
        for (std::size_t k = 0; k < window.channel_count(); ++k) {
            if (window.channel(k).id == g.id) {
                c = k;
            }
        }
        if (c == window.channel_count()) {
            throw ValidationError(fmt::format("generator '{}' has no V:{} column", g.id, g.id));
        }
        const double eq0 = cfg.assess.eq0.value_or(v_pre[c]);
        json entry = {{"id", g.id}, {"eq0", eq0}, {"v_pre", v_pre[c]}};
        if (std::abs(decomp.residual[c][0] - eq0) <= lyapunov::kDeviationFloor) {
            entry["status"] = "no-dip";
            doc.push_back(entry);
            continue;
        }
        const auto t = indices::tune_generator(window.channel(c), decomp.residual[c], v_pre[c], eq0, window.dt(), g,
                                               cfg.assess);
        json caps = json::array();
        for (const auto& cap : t.caps) {
            caps.push_back({{"v_cap", cap.v}, {"t", cap.t}});
        }
        entry["caps"] = caps;
        entry["status"] = status_name(t.signals.status);
        entry["lambda_slow"] = t.signals.lambda_slow;
        entry["lambda_fast"] = t.signals.lambda_fast;
        entry["tuning"] = t.tuning ? tuning_json(*t.tuning) : json(nullptr);
        doc.push_back(entry);
    }
    out << json{{"generators", doc}, {"config", config_json(cfg)}}.dump(2) << '\n';
    return 0;
}

int cmd_synth(const RunConfig& cfg, const std::string& kind, std::ostream& out) {
    auto params = cfg.scenario;
    params.seed = cfg.seed;
    const auto scenario = synth::synth_scenario(synth::parse_scenario_kind(kind), params);
    ingest::write_trajectory(out, scenario.trajectory);
    spdlog::info("fault cleared at t = {} s", scenario.fault_clear_time);
    return 0;
}

int report(std::ostream& err, const char* what, int code) {
    err << "error: " << what << '\n';
    return code;
}

}  // namespace

json config_json(const RunConfig& cfg) {
    const auto& a = cfg.assess;
    return {
        {"fault_clear_time", optional_number(cfg.fault_clear_time)},
        {"window", a.window},
        {"lookback", a.lookback},
        {"imf_grid", grid_json(a.imf_grid)},
        {"residual_grid", grid_json(a.residual_grid)},
        {"gamma2", a.gamma2},
        {"gamma1_default", a.gamma1},
        {"x_star_default", a.x_star},
        {"imf_band", {a.band_lo, a.band_hi}},
        {"embedding",
         {{"m", a.embedding.m},
          {"tau", a.embedding.tau ? json(*a.embedding.tau) : json(nullptr)},
          {"theiler", a.embedding.theiler ? json(*a.embedding.theiler) : json(nullptr)}}},
        {"sift",
         {{"sd_threshold", a.sift.sd_threshold},
          {"max_iterations", a.sift.max_iterations},
          {"hard_cap", a.sift.hard_cap},
          {"max_imfs", a.sift.max_imfs},
          {"directions", a.sift.directions}}},
        {"search",
         {{"gamma", {a.search.gamma_lo, a.search.gamma_hi}},
          {"gamma_points", a.search.gamma_points},
          {"x_star", {a.search.x_star_lo, a.search.x_star_hi}},
          {"x_star_points", a.search.x_star_points}}},
        {"oscillation_epsilon", a.oscillation_epsilon},
        {"recovery_epsilon", optional_number(a.recovery_epsilon)},
        {"eq0", optional_number(a.eq0)},
        {"gen_config", cfg.gen_config.empty() ? json(nullptr) : json(cfg.gen_config)},
        {"stream", cfg.stream},
        {"report_interval", cfg.report_interval},
    };
}

json assessment_json(const indices::StabilityAssessment& a, const RunConfig& cfg, double latency_s) {
    json gens = json::array();
    for (const auto& g : a.generators) {
        json e = {{"id", g.id},
                  {"index", g.index},
                  {"threshold", optional_number(g.threshold)},
                  {"margin", optional_number(g.margin)},
                  {"class", g.classification},
                  {"delta_r0", g.delta_r0},
                  {"tag", g.tag.empty() ? json(nullptr) : json(g.tag)}};
        if (g.tuning && g.tuning->tuning) {
            e["tuning"] = tuning_json(*g.tuning->tuning);
        }
        gens.push_back(std::move(e));
    }
    return {{"oscillation",
             {{"index", a.oscillation_index},
              {"threshold", a.oscillation_threshold},
              {"margin", a.oscillation_margin},
              {"class", indices::classification_name(a.oscillation_class)},
              {"tag", a.oscillation_tag.empty() ? json(nullptr) : json(a.oscillation_tag)}}},
            {"generators", gens},
            {"config", config_json(cfg)},
            {"latency_s", latency_s}};
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    const ScopedLogger logging(err);
    RunConfig cfg;
    std::optional<double> t0, window, lo, hi, gamma2, eq0, interval;
    std::optional<std::size_t> bins;
    std::optional<std::uint64_t> seed;
    std::string synth_kind;

    CLI::App app{"Short-term voltage stability indices from post-fault measurements", "stvs"};
    app.require_subcommand(1);
    app.add_option("--in", cfg.input, "Input CSV (time, V:<id>, optional Q:<id>); '-' for stdin");
    app.add_option("--out", cfg.output, "Output file (default stdout)");
    app.add_option("--t0", t0, "Fault clear time in seconds");
    app.add_option("--window", window, "Post-fault analysis window in seconds");
    app.add_option("--bins", bins, "IMF histogram bin count");
    app.add_option("--lo", lo, "IMF histogram lower edge");
    app.add_option("--hi", hi, "IMF histogram upper edge");
    app.add_option("--gamma2", gamma2, "Gompertz shape of the oscillation reference");
    app.add_option("--gen-config", cfg.gen_config, "Generator machine data file");
    app.add_flag("--stream", cfg.stream, "Assess rows incrementally and emit JSON lines");
    app.add_option("--report-interval", interval, "Seconds of new data between streamed reports");
    app.add_option("--seed", seed, "Seed for synthetic data");
    app.add_option("--eq0", eq0, "Post-fault equilibrium voltage in pu (default: pre-fault mean)");
    app.add_option("--config", cfg.config_file, "key = value configuration file");

    auto* assess = app.add_subcommand("assess", "Oscillation and recovery indices as JSON")->fallthrough();
    auto* decompose = app.add_subcommand("decompose", "IMFs and residuals as CSV")->fallthrough();
    auto* exponents = app.add_subcommand("exponents", "Exponent series as CSV")->fallthrough();
    auto* thresholds = app.add_subcommand("thresholds", "Critical IMF index and reference")->fallthrough();
    auto* tune = app.add_subcommand("tune", "Tuned Gompertz shape per generator")->fallthrough();
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic scenario as CSV")->fallthrough();
    synth_cmd->add_option("kind", synth_kind, "stable-osc | growing-osc | fast-recovery | stalled-recovery | mixed")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    }

    try {
        if (!cfg.config_file.empty()) {
            apply_config_file(cfg.config_file, cfg);
        }
        if (t0) cfg.fault_clear_time = *t0;
        if (window) {
            if (!(*window > 0.0)) throw ValidationError("--window must be positive");
            cfg.assess.window = *window;
        }
        if (bins) cfg.assess.imf_grid.bins = *bins;
        if (lo) cfg.assess.imf_grid.lo = *lo;
        if (hi) cfg.assess.imf_grid.hi = *hi;
        if (gamma2) cfg.assess.gamma2 = *gamma2;
        if (eq0) {
            if (!(*eq0 > 0.0)) throw ValidationError("--eq0 must be positive");
            cfg.assess.eq0 = *eq0;
        }
        if (interval) {
            if (!(*interval > 0.0)) throw ValidationError("--report-interval must be positive");
            cfg.report_interval = *interval;
        }
        if (seed) cfg.seed = *seed;
        cfg.assess.imf_grid.validate();
        cfg.assess.residual_grid.validate();

        Output sink(cfg.output, out);
        auto& o = sink.get();
        spdlog::debug("distance kernels: {}", simd::isa_name(simd::active_isa()));
        if (assess->parsed()) return cmd_assess(cfg, o, err);
        if (decompose->parsed()) return cmd_decompose(cfg, o);
        if (exponents->parsed()) return cmd_exponents(cfg, o);
        if (thresholds->parsed()) return cmd_thresholds(cfg, o);
        if (tune->parsed()) return cmd_tune(cfg, o);
        if (synth_cmd->parsed()) return cmd_synth(cfg, synth_kind, o);
    } catch (const StageError& e) {
        return report(err, e.what(), e.is_validation() ? 1 : 2);
    } catch (const ValidationError& e) {
        return report(err, e.what(), 1);
    } catch (const ComputationError& e) {
        return report(err, e.what(), 2);
    } catch (const std::exception& e) {
        return report(err, e.what(), 2);
    }
    return 1;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("stvs");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace stvs::cli
