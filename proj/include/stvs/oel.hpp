#pragma once

// Over-excitation limiter characteristic, critical recovery signals and the
// Gompertz shape tuner that yields the recovery threshold.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stvs/distribution.hpp"
#include "stvs/lyapunov.hpp"

namespace stvs::oel {

struct QvFit {
    double k1 = 0.0;  // V = k1 Q + k2
    double k2 = 0.0;
};

/// Ordinary least squares of V on Q through the 2x2 normal equations.
QvFit fit_qv(std::span<const double> v, std::span<const double> q);

struct MachineData {
    double xd_prime = 0.0;  // pu
    double p_active = 0.0;  // pu
    QvFit qv;
};

/// Residual of (V + c (V - K2) / V)^2 + (X P / V)^2 - E^2 with c = X / K1.
double ev_residual(double v, double e, const MachineData& machine);

/// Every real root of the quartic that lies in (0, 2) pu, ascending.
std::vector<double> voltage_cap_roots(double e, const MachineData& machine);

/// The admissible root closest to v_ref. Throws ComputationError when the
/// pickup level is unreachable under the fitted Q-V line.
double voltage_cap(double e, const MachineData& machine, double v_ref);

/// Voltage-time pickup point (V_cap, t) with t measured from fault clearing.
struct CapPoint {
    double v = 0.0;
    double t = 0.0;
};

enum class SignalStatus { ok, trivially_safe, trivially_tripping };

struct CriticalSignals {
    SignalStatus status = SignalStatus::ok;
    std::vector<double> s1;  // slowest admissible recovery touching the cap
    std::vector<double> s2;  // fastest admissible recovery touching the cap
    double lambda_slow = 0.0;
    double lambda_fast = 0.0;
    std::size_t binding_cap = 0;
};

/// Recoveries s(t) = eq0 - A exp(lambda t), lambda from the observed exponent
/// range clamped to <= 0, each with the largest A that keeps s(t_i) >= V_cap,i
/// for every pickup; sampled on t = k dt, k = 0..n-1 and floored at 0 pu.
CriticalSignals construct_critical_signals(std::span<const double> residual, double eq0, double dt,
                                           std::span<const CapPoint> caps,
                                           const lyapunov::ExponentSeries& exponents);

struct SearchSpace {
    double gamma_lo = 1.0;
    double gamma_hi = 200.0;
    std::size_t gamma_points = 40;  // log spaced
    double x_star_lo = 0.8;
    double x_star_hi = 1.3;
    std::size_t x_star_points = 26;

    std::vector<double> gammas() const;
    std::vector<double> x_stars() const;
};

struct TuningResult {
    double gamma1 = 0.0;
    double x_star = 0.0;
    double d_s1 = 0.0;
    double d_s2 = 0.0;
    double f_star = 0.0;
    double epsilon = 0.0;
    double d_critical_r = 0.0;
};

/// Recovery index of a residual for one Gompertz shape:
/// |v_pre - R(0)| * KL(P1 || sigma(gamma, x_star)).
double recovery_index_value(std::span<const double> residual, double v_pre, double eq0, double dt,
                            double gamma, double x_star, const distribution::Grid& grid);

/// Two-stage grid search: f* = min |D_s1 - D_s2|, then the smallest gamma
/// (then smallest x*) with |D_s1 - D_s2| <= f* + epsilon. Epsilon defaults to f*.
TuningResult tune_gamma(std::span<const double> s1, std::span<const double> s2, double eq0, double v_pre,
                        double dt, const distribution::Grid& grid, const SearchSpace& search,
                        std::optional<double> epsilon = std::nullopt);

}  // namespace stvs::oel
