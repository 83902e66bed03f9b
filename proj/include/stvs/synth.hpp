#pragma once

// Synthetic validation signals: the linear two-time-scale benchmark, seeded
// measurement noise, and post-fault scenario families.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stvs/ingest.hpp"

namespace stvs::synth {

/// SplitMix64 stream with Box-Muller normals. Identical output on every
/// platform for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept;
    /// Uniform on (0, 1], 53 bits.
    double uniform() noexcept;
    double normal() noexcept;

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct TwoTimescaleParams {
    double a = 1.0;
    double omega = 10.0;
    double b = 5.0;
    double eps = 0.01;
    double z0 = 1.0;
    double x0 = 0.0;
    double y0 = 0.0;
    bool paper_regime = false;  // enforce omega > a > eps > 0

    void validate() const;
};

struct StateTrajectory {
    double dt = 0.0;
    std::vector<double> t, x, y, z;

    std::size_t size() const noexcept { return t.size(); }
    double norm(std::size_t i) const;
};

/// Exact closed-form solution sampled at t = k dt, k = 0..floor(t_end / dt).
StateTrajectory simulate_two_timescale(const TwoTimescaleParams& p, double t_end, double dt);

/// Classical RK4 of the same system; used as an independent oracle.
StateTrajectory integrate_two_timescale(const TwoTimescaleParams& p, double t_end, double dt);

struct AnalyticFtle {
    double lambda = 0.0;
    double positivity_bound = 0.0;  // lambda > 0 for T below this, when eps > 0
    bool in_validity_window = false;
};

/// lambda(T) = -eps + (1/T) ln sqrt(1 + b^2 / ((a - eps)^2 + omega^2)) and its
/// positivity bound T < ln(1 + b^2 / ((a - eps)^2 + omega^2)) / (2 eps).
/// Logs a warning outside 3/a < T < 1/(3 eps).
AnalyticFtle analytic_ftle(const TwoTimescaleParams& p, double T);

/// (1/T) ln(|X(T)| / |X(0)|) from a sampled trajectory, with T = k dt.
double numerical_ftle(const StateTrajectory& traj, std::size_t k);

struct NoiseSpec {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

void add_noise(std::span<double> samples, Rng& rng, double sigma);
ingest::VoltageTrajectory add_noise(const ingest::VoltageTrajectory& traj, const NoiseSpec& spec);

enum class ScenarioKind { stable_osc, growing_osc, fast_recovery, stalled_recovery, mixed };

ScenarioKind parse_scenario_kind(std::string_view name);
std::string_view scenario_name(ScenarioKind kind) noexcept;

struct ScenarioParams {
    double dt = 0.02;
    double prefault = 1.0;      // s before the fault
    double fault = 0.1;         // s of fault-on dip
    double post = 3.0;          // s after clearing
    std::size_t channels = 3;
    double v_pre = 1.0;
    double fault_level = 0.4;
    double amplitude = 0.05;    // oscillation amplitude, pu
    double frequency = 1.5;     // Hz
    double decay = 0.4;         // 1/s, stable-osc and mixed
    double growth = 0.3;        // 1/s, growing-osc
    double dip = 0.3;           // initial residual depth, fast-recovery and mixed
    double recovery = 2.0;      // 1/s
    double level = 0.7;         // stalled-recovery hold level
    double wobble = 0.01;       // stalled-recovery oscillation amplitude
    bool reactive_power = false;
    double k1 = -0.5;           // Q synthesized from V = k1 Q + k2
    double k2 = 1.2;
    double noise = 0.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct Scenario {
    ScenarioKind kind;
    ScenarioParams params;
    ingest::VoltageTrajectory trajectory;
    double fault_clear_time = 0.0;
};

/// Post-fault voltages per kind, for t measured from clearing:
///   stable-osc       v_pre + A e^{-decay t} sin(2 pi f t + phi_c)
///   growing-osc      v_pre + A e^{growth t} sin(2 pi f t + phi_c)
///   fast-recovery    v_pre - dip e^{-recovery t}
///   stalled-recovery level + wobble sin(2 pi f t + phi_c)
///   mixed            v_pre - dip e^{-recovery t} + A e^{-decay t} sin(2 pi f t + phi_c)
Scenario synth_scenario(ScenarioKind kind, const ScenarioParams& params);

}  // namespace stvs::synth
