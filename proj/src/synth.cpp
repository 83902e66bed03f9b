#include "stvs/synth.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "stvs/errors.hpp"

namespace stvs::synth {

std::uint64_t Rng::next_u64() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

void TwoTimescaleParams::validate() const {
    if (!std::isfinite(a) || !std::isfinite(omega) || !std::isfinite(b) || !std::isfinite(eps) ||
        !std::isfinite(z0) || !std::isfinite(x0) || !std::isfinite(y0)) {
        throw ValidationError("two-time-scale parameters must be finite");
    }
    if (paper_regime && !(omega > a && a > eps && eps > 0.0)) {
        throw ValidationError(
            fmt::format("expected omega > a > eps > 0, got omega = {}, a = {}, eps = {}", omega, a, eps));
    }
    if (a == eps && omega == 0.0) {
        throw ValidationError("resonant two-time-scale parameters: a + j omega equals eps");
    }
}

double StateTrajectory::norm(std::size_t i) const {
    return std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
}

namespace {

std::size_t step_count(double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end > dt)) {
        throw ValidationError(fmt::format("need dt > 0 and t_end > dt (dt = {}, t_end = {})", dt, t_end));
    }
    return static_cast<std::size_t>(std::floor(t_end / dt + 1e-9)) + 1;
}

}  // namespace

StateTrajectory simulate_two_timescale(const TwoTimescaleParams& p, double t_end, double dt) {
    p.validate();
    const std::size_t n = step_count(t_end, dt);
    const std::complex<double> s(p.a, p.omega);
    const std::complex<double> w0(p.x0, p.y0);
    const std::complex<double> denom = s - p.eps;
    StateTrajectory out;
    out.dt = dt;
    out.t.resize(n);
    out.x.resize(n);
    out.y.resize(n);
    out.z.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double slow = std::exp(-p.eps * t);
        const std::complex<double> fast = std::exp(-s * t);
        const std::complex<double> w = p.b * p.z0 * (slow - fast) / denom + w0 * fast;
        out.t[k] = t;
        out.x[k] = w.real();
        out.y[k] = w.imag();
        out.z[k] = p.z0 * slow;
    }
    return out;
}

StateTrajectory integrate_two_timescale(const TwoTimescaleParams& p, double t_end, double dt) {
    p.validate();
    const std::size_t n = step_count(t_end, dt);
    auto rhs = [&](const double* u, double* du) {
        du[0] = -p.a * u[0] + p.omega * u[1] + p.b * u[2];
        du[1] = -p.omega * u[0] - p.a * u[1];
        du[2] = -p.eps * u[2];
    };
    StateTrajectory out;
    out.dt = dt;
    out.t.resize(n);
    out.x.resize(n);
    out.y.resize(n);
    out.z.resize(n);
    double u[3] = {p.x0, p.y0, p.z0};
    for (std::size_t k = 0; k < n; ++k) {
        out.t[k] = static_cast<double>(k) * dt;
        out.x[k] = u[0];
        out.y[k] = u[1];
        out.z[k] = u[2];
        if (k + 1 == n) {
            break;
        }
        double k1[3], k2[3], k3[3], k4[3], tmp[3];
        rhs(u, k1);
        for (int i = 0; i < 3; ++i) tmp[i] = u[i] + 0.5 * dt * k1[i];
        rhs(tmp, k2);
        for (int i = 0; i < 3; ++i) tmp[i] = u[i] + 0.5 * dt * k2[i];
        rhs(tmp, k3);
        for (int i = 0; i < 3; ++i) tmp[i] = u[i] + dt * k3[i];
        rhs(tmp, k4);
        for (int i = 0; i < 3; ++i) u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return out;
}

AnalyticFtle analytic_ftle(const TwoTimescaleParams& p, double T) {
    p.validate();
    if (!(T > 0.0)) {
        throw ValidationError("FTLE window must be positive");
    }
    const double ratio = p.b * p.b / ((p.a - p.eps) * (p.a - p.eps) + p.omega * p.omega);
    const double log_gain = std::log1p(ratio);
    AnalyticFtle out;
    out.lambda = -p.eps + 0.5 * log_gain / T;
    out.positivity_bound = p.eps > 0.0 ? log_gain / (2.0 * p.eps) : std::numeric_limits<double>::infinity();
    out.in_validity_window = T > 3.0 / p.a && (p.eps <= 0.0 || T < 1.0 / (3.0 * p.eps));
    if (!out.in_validity_window) {
        spdlog::warn("T = {} s lies outside the intermediate window 3/a < T < 1/(3 eps)", T);
    }
    return out;
}

double numerical_ftle(const StateTrajectory& traj, std::size_t k) {
    if (k == 0 || k >= traj.size()) {
        throw ValidationError("FTLE offset must lie inside the trajectory and be positive");
    }
    const double n0 = traj.norm(0);
    const double nk = traj.norm(k);
    if (!(n0 > 0.0) || !(nk > 0.0)) {
        throw ComputationError("zero state norm");
    }
    return std::log(nk / n0) / (static_cast<double>(k) * traj.dt);
}

void add_noise(std::span<double> samples, Rng& rng, double sigma) {
    if (sigma == 0.0) {
        return;
    }
    for (double& v : samples) {
        v += sigma * rng.normal();
    }
}

ingest::VoltageTrajectory add_noise(const ingest::VoltageTrajectory& traj, const NoiseSpec& spec) {
    if (!(spec.sigma >= 0.0)) {
        throw ValidationError("noise standard deviation must be non-negative");
    }
    Rng rng(spec.seed);
    auto channels = traj.channels();
    for (auto& ch : channels) {
        add_noise(ch.voltage, rng, spec.sigma);
    }
    std::vector<double> v_pre(traj.prefault_voltage().begin(), traj.prefault_voltage().end());
    return ingest::VoltageTrajectory(std::move(channels), traj.dt(), traj.fault_clear_index(),
                                     traj.start_time(), std::move(v_pre), traj.fault_onset_index());
}

ScenarioKind parse_scenario_kind(std::string_view name) {
    for (auto kind : {ScenarioKind::stable_osc, ScenarioKind::growing_osc, ScenarioKind::fast_recovery,
                      ScenarioKind::stalled_recovery, ScenarioKind::mixed}) {
        if (scenario_name(kind) == name) {
            return kind;
        }
    }
    throw ValidationError(fmt::format("unknown scenario kind '{}'", name));
}

std::string_view scenario_name(ScenarioKind kind) noexcept {
    switch (kind) {
        case ScenarioKind::stable_osc: return "stable-osc";
        case ScenarioKind::growing_osc: return "growing-osc";
        case ScenarioKind::fast_recovery: return "fast-recovery";
        case ScenarioKind::stalled_recovery: return "stalled-recovery";
        case ScenarioKind::mixed: return "mixed";
    }
    return "mixed";
}

void ScenarioParams::validate() const {
    if (!(dt > 0.0) || !(prefault >= 0.0) || !(fault >= 0.0) || !(post > 0.0)) {
        throw ValidationError("scenario timing must be positive");
    }
    if (channels == 0) {
        throw ValidationError("scenario needs at least one channel");
    }
    if (!(v_pre > 0.0) || !(fault_level > 0.0) || !(level > 0.0)) {
        throw ValidationError("scenario voltage levels must be positive");
    }
    if (!(amplitude >= 0.0) || !(frequency >= 0.0) || !(dip >= 0.0) || !(wobble >= 0.0) || !(noise >= 0.0)) {
        throw ValidationError("scenario amplitudes must be non-negative");
    }
    if (reactive_power && k1 == 0.0) {
        throw ValidationError("Q-V slope k1 must be non-zero");
    }
}

Scenario synth_scenario(ScenarioKind kind, const ScenarioParams& params) {
    params.validate();
    const auto& p = params;
    const auto n_pre = static_cast<std::size_t>(std::llround(p.prefault / p.dt));
    const auto n_fault = static_cast<std::size_t>(std::llround(p.fault / p.dt));
    const auto n_post = static_cast<std::size_t>(std::llround(p.post / p.dt)) + 1;
    const std::size_t clear = n_pre + n_fault;
    const std::size_t n = clear + n_post;
    const double two_pi_f = 2.0 * std::numbers::pi * p.frequency;

    Rng rng(p.seed);
    std::vector<ingest::Channel> channels(p.channels);
    for (std::size_t c = 0; c < p.channels; ++c) {
        auto& ch = channels[c];
        ch.id = fmt::format("B{}", c + 1);
        ch.voltage.resize(n);
        const double phase = 0.7 * static_cast<double>(c);
        for (std::size_t i = 0; i < n; ++i) {
            double v = p.v_pre;
            if (i >= n_pre && i < clear) {
                v = p.fault_level;
            } else if (i >= clear) {
                const double t = static_cast<double>(i - clear) * p.dt;
                const double wave = std::sin(two_pi_f * t + phase);
                switch (kind) {
                    case ScenarioKind::stable_osc:
                        v = p.v_pre + p.amplitude * std::exp(-p.decay * t) * wave;
                        break;
                    case ScenarioKind::growing_osc:
                        v = p.v_pre + p.amplitude * std::exp(p.growth * t) * wave;
                        break;
                    case ScenarioKind::fast_recovery:
                        v = p.v_pre - p.dip * std::exp(-p.recovery * t);
                        break;
                    case ScenarioKind::stalled_recovery:
                        v = p.level + p.wobble * wave;
                        break;
                    case ScenarioKind::mixed:
                        v = p.v_pre - p.dip * std::exp(-p.recovery * t) +
                            p.amplitude * std::exp(-p.decay * t) * wave;
                        break;
                }
            }
            ch.voltage[i] = v;
        }
        if (p.noise > 0.0) {
            add_noise(ch.voltage, rng, p.noise);
        }
        if (p.reactive_power) {
            ch.reactive_power.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                ch.reactive_power[i] = (ch.voltage[i] - p.k2) / p.k1;
            }
        }
    }
    ingest::VoltageTrajectory traj(std::move(channels), p.dt, clear, 0.0, {}, n_pre);
    return Scenario{kind, params, std::move(traj), static_cast<double>(clear) * p.dt};
}

}  // namespace stvs::synth
