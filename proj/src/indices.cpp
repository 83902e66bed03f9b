#include "stvs/indices.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "stvs/embed.hpp"
#include "stvs/errors.hpp"

namespace stvs::indices {

namespace {

template <typename F>
auto in_stage(const char* stage, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const ValidationError& e) {
        throw StageError(stage, e.what(), true);
    } catch (const ComputationError& e) {
        throw StageError(stage, e.what(), false);
    }
}

double energy(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) {
        s += v * v;
    }
    return s;
}

}  // namespace

std::string_view classification_name(Classification c) noexcept {
    switch (c) {
        case Classification::stable: return "stable";
        case Classification::unstable: return "unstable";
        case Classification::critical: return "critical";
    }
    return "critical";
}

ClassifyResult classify(double index, double threshold, double epsilon) {
    if (!(threshold > 0.0)) {
        throw ComputationError(fmt::format("classification threshold must be positive, got {}", threshold));
    }
    if (!(epsilon >= 0.0)) {
        throw ValidationError("detection tolerance must be non-negative");
    }
    // Rounding slack so points built to sit on the band edge stay inside it.
    const double slack = 1e-12 * std::max(threshold, std::abs(index));
    ClassifyResult r;
    r.margin = (index - threshold) / threshold * 100.0;
    if (index < threshold - 0.5 * epsilon - slack) {
        r.classification = Classification::stable;
    } else if (index > threshold + 0.5 * epsilon + slack) {
        r.classification = Classification::unstable;
    } else {
        r.classification = Classification::critical;
    }
    return r;
}

OscillationResult oscillation_index(const emd::DecompositionResult& decomp, double gamma2,
                                    const distribution::Grid& grid, const EmbeddingConfig& embedding) {
    grid.validate();
    OscillationResult out;
    const std::size_t channels = decomp.channel_count();
    const std::size_t n = decomp.length();

    std::vector<std::vector<double>> signals(channels, std::vector<double>(n, 0.0));
    double best_energy = 0.0;
    double dominant_freq = 0.0;
    std::size_t dominant_channel = 0;
    double best_channel_energy = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
        for (const auto& imf : decomp.imfs[c]) {
            for (std::size_t i = 0; i < n; ++i) {
                signals[c][i] += imf[i];
            }
            const double e = energy(imf);
            if (e > best_energy) {
                best_energy = e;
                dominant_freq = emd::zero_crossing_frequency(imf, decomp.dt);
            }
        }
        const double e = energy(signals[c]);
        if (e > best_channel_energy) {
            best_channel_energy = e;
            dominant_channel = c;
        }
    }
    if (best_channel_energy == 0.0 || n < 3) {
        out.tag = "no-oscillatory-content";
        return out;
    }

    const auto states = embed::normalize_columns(embed::augment_rocov(signals));
    const std::size_t len = states.length();
    const std::size_t m = std::max<std::size_t>(1, embedding.m);
    const std::size_t period = embed::period_samples(dominant_freq, decomp.dt);

    std::size_t tau = 1;
    if (embedding.tau) {
        tau = *embedding.tau;
    } else if (n >= 32) {
        tau = embed::select_delay(signals[dominant_channel]);
    } else {
        tau = std::max<std::size_t>(1, period / 4);
    }
    if (m > 1) {
        tau = std::clamp<std::size_t>(tau, 1, std::max<std::size_t>(1, len / (2 * (m - 1))));
    }
    if (len <= (m - 1) * tau + 1) {
        throw ValidationError(fmt::format("{} samples are too few to embed with m = {}", n, m));
    }
    const std::size_t points = len - (m - 1) * tau;
    std::size_t theiler = embedding.theiler.value_or(period);
    theiler = std::min(theiler, points / 4);

    const auto emb = embed::delay_embed(states, m, tau, theiler, decomp.dt);
    const auto pairs = embed::nearest_neighbors(emb);
    out.exponents = lyapunov::ftle_imf_series(emb, pairs);
    out.m = m;
    out.tau = tau;
    out.theiler = theiler;
    out.pairs = pairs.size();

    const auto hist = distribution::histogram(out.exponents.divergence_factors, grid);
    const auto ref = distribution::gompertz_reference(gamma2, 1.0, grid);
    out.index = distribution::kl_divergence(hist, ref);
    return out;
}

std::size_t imf_threshold_centre_bin(const distribution::Grid& grid) {
    grid.validate();
    if (grid.bins < 3) {
        throw ValidationError("critical IMF distribution needs at least 3 bins");
    }
    const auto centres = grid.centers();
    std::size_t centre = grid.bins;
    for (std::size_t i = 0; i < grid.bins; ++i) {
        if (centres[i] <= 1.0) {
            centre = i;
        }
    }
    if (centre == grid.bins || centre == 0 || centre + 1 >= grid.bins || grid.hi < 1.0 || grid.lo > 1.0) {
        throw ValidationError(fmt::format("grid [{}, {}] with {} bins does not hold three bins around x = 1",
                                          grid.lo, grid.hi, grid.bins));
    }
    return centre;
}

double imf_threshold(const distribution::Grid& grid, double gamma2) {
    const std::size_t c = imf_threshold_centre_bin(grid);
    distribution::DivergenceHistogram p;
    p.bin_edges = grid.edges();
    p.probabilities.assign(grid.bins, 0.0);
    for (std::size_t i = c - 1; i <= c + 1; ++i) {
        p.probabilities[i] = 1.0 / 3.0;
    }
    return distribution::kl_divergence(p, distribution::gompertz_reference(gamma2, 1.0, grid));
}

RecoveryResult recovery_index(std::span<const double> residual, double v_pre, double eq0, double dt,
                              double gamma1, double x_star, const distribution::Grid& grid) {
    RecoveryResult out;
    if (residual.size() < 2) {
        throw ValidationError("recovery index needs at least two residual samples");
    }
    out.delta_r0 = std::abs(v_pre - residual[0]);
    if (std::abs(residual[0] - eq0) <= lyapunov::kDeviationFloor) {
        out.tag = "no-dip";
        return out;
    }
    out.exponents = lyapunov::fsle_residual_series(residual, eq0, 0, dt);
    const auto hist = distribution::histogram(out.exponents->divergence_factors, grid);
    out.index = out.delta_r0 * distribution::kl_divergence(hist, distribution::gompertz_reference(gamma1, x_star, grid));
    return out;
}

GeneratorTuning tune_generator(const ingest::Channel& window_channel, std::span<const double> residual,
                               double v_pre, double eq0, double dt, const GeneratorConfig& machine,
                               const AssessConfig& config) {
    GeneratorTuning out;
    if (!machine.pickups.empty()) {
        if (!window_channel.has_reactive_power()) {
            throw ValidationError(fmt::format("generator '{}' has OEL pickups but no Q:{} column", machine.id,
                                              machine.id));
        }
        oel::MachineData data;
        data.xd_prime = machine.xd_prime;
        data.p_active = machine.p_active;
        data.qv = oel::fit_qv(window_channel.voltage, window_channel.reactive_power);
        const double v_ref = window_channel.voltage.back();
        for (const auto& [e, t] : machine.pickups) {
            out.caps.push_back({oel::voltage_cap(e, data, v_ref), t});
        }
    }
    for (const auto& cap : machine.lvrt) {
        out.caps.push_back(cap);
    }
    if (out.caps.empty()) {
        throw ValidationError(fmt::format("generator '{}' has neither pickup nor lvrt entries", machine.id));
    }
    const auto exps = lyapunov::fsle_residual_series(residual, eq0, 0, dt);
    out.signals = oel::construct_critical_signals(residual, eq0, dt, out.caps, exps);
    if (out.signals.status == oel::SignalStatus::ok) {
        out.tuning = oel::tune_gamma(out.signals.s1, out.signals.s2, eq0, v_pre, dt, config.residual_grid,
                                     config.search, config.recovery_epsilon);
    }
    return out;
}

std::vector<double> prefault_voltage(const ingest::VoltageTrajectory& traj, const AssessConfig& config) {
    if (traj.has_prefault_voltage()) {
        return {traj.prefault_voltage().begin(), traj.prefault_voltage().end()};
    }
    const std::size_t onset = ingest::detect_fault_onset_index(traj);
    if (onset == 0) {
        if (config.eq0) {
            return std::vector<double>(traj.channel_count(), *config.eq0);
        }
        throw ValidationError("no pre-fault samples before the fault; supply eq0");
    }
    const double available = static_cast<double>(onset) * traj.dt();
    return ingest::estimate_prefault_voltage(traj, std::min(config.lookback, available));
}

StabilityAssessment assess(const ingest::VoltageTrajectory& traj, const AssessConfig& config,
                           const std::vector<GeneratorConfig>& generators,
                           std::optional<std::size_t> window_samples) {
    StabilityAssessment out;
    const auto v_pre = in_stage("ingest", [&] { return prefault_voltage(traj, config); });
    const auto window = in_stage("ingest", [&] {
        const double duration = window_samples ? static_cast<double>(*window_samples) * traj.dt() : config.window;
        return ingest::extract_post_fault_window(traj, duration);
    });
    out.window_s = static_cast<double>(window.length()) * window.dt();
    const double dt = window.dt();

    const auto decomp = in_stage("emd", [&] { return emd::decompose(window, config.sift); });
    const auto retained =
        in_stage("emd", [&] { return emd::filter_imfs_by_frequency(decomp, config.band_lo, config.band_hi); });

    const auto osc = in_stage("oscillation", [&] {
        return oscillation_index(retained, config.gamma2, config.imf_grid, config.embedding);
    });
    out.oscillation_index = osc.index;
    out.oscillation_tag = osc.tag;
    out.oscillation_threshold = in_stage("oscillation", [&] { return imf_threshold(config.imf_grid, config.gamma2); });
    out.oscillation_epsilon = config.oscillation_epsilon;
    const auto osc_class = classify(osc.index, out.oscillation_threshold, config.oscillation_epsilon);
    out.oscillation_class = osc_class.classification;
    out.oscillation_margin = osc_class.margin;
    spdlog::debug("oscillation index {} (m = {}, tau = {}, theiler = {}, pairs = {})", osc.index, osc.m, osc.tau,
                  osc.theiler, osc.pairs);

    for (std::size_t c = 0; c < window.channel_count(); ++c) {
        const auto& channel = window.channel(c);
        GeneratorAssessment g;
        g.id = channel.id;
        g.v_pre = v_pre[c];
        g.eq0 = config.eq0.value_or(v_pre[c]);
        const auto& residual = decomp.residual[c];
        const auto machine = std::find_if(generators.begin(), generators.end(),
                                          [&](const GeneratorConfig& m) { return m.id == channel.id; });

        if (machine == generators.end()) {
            const auto rec = in_stage("recovery", [&] {
                return recovery_index(residual, g.v_pre, g.eq0, dt, config.gamma1, config.x_star,
                                      config.residual_grid);
            });
            g.index = rec.index;
            g.delta_r0 = rec.delta_r0;
            g.tag = rec.tag;
            g.classification = "unassessed";
            out.generators.push_back(std::move(g));
            continue;
        }

        g.delta_r0 = std::abs(g.v_pre - residual[0]);
        if (std::abs(residual[0] - g.eq0) <= lyapunov::kDeviationFloor) {
            g.tag = "no-dip";
            g.classification = "non-trip";
            out.generators.push_back(std::move(g));
            continue;
        }
        auto tuning = in_stage("oel", [&] {
            return tune_generator(channel, residual, g.v_pre, g.eq0, dt, *machine, config);
        });
        switch (tuning.signals.status) {
            case oel::SignalStatus::trivially_safe:
                g.tag = "trivially-safe";
                g.classification = "non-trip";
                break;
            case oel::SignalStatus::trivially_tripping:
                g.tag = "trivially-tripping";
                g.classification = "trip";
                break;
            case oel::SignalStatus::ok: {
                const auto& t = *tuning.tuning;
                const auto rec = in_stage("recovery", [&] {
                    return recovery_index(residual, g.v_pre, g.eq0, dt, t.gamma1, t.x_star, config.residual_grid);
                });
                g.index = rec.index;
                const auto cls = in_stage("recovery", [&] { return classify(rec.index, t.d_critical_r, std::abs(t.d_s1 - t.d_s2)); });
                g.threshold = t.d_critical_r;
                g.margin = cls.margin;
                switch (cls.classification) {
                    case Classification::stable: g.classification = "non-trip"; break;
                    case Classification::unstable: g.classification = "trip"; break;
                    case Classification::critical: g.classification = "critical"; break;
                }
                break;
            }
        }
        g.tuning = std::move(tuning);
        out.generators.push_back(std::move(g));
    }
    return out;
}

}  // namespace stvs::indices
