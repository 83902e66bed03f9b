#include "stvs/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <fmt/format.h>

#include "stvs/errors.hpp"

namespace stvs::lyapunov {

namespace {

void fill_factors(ExponentSeries& s) {
    s.divergence_factors.resize(s.lambdas.size());
    std::transform(s.lambdas.begin(), s.lambdas.end(), s.divergence_factors.begin(),
                   [](double l) { return std::exp(l); });
}

}  // namespace

double ExponentSeries::min_lambda() const {
    if (lambdas.empty()) {
        throw ComputationError("empty exponent series");
    }
    return *std::min_element(lambdas.begin(), lambdas.end());
}

double ExponentSeries::max_lambda() const {
    if (lambdas.empty()) {
        throw ComputationError("empty exponent series");
    }
    return *std::max_element(lambdas.begin(), lambdas.end());
}

double ftle_window(double delta0, double deltaT, double T) {
    if (!(delta0 > 0.0) || !(deltaT > 0.0) || !(T > 0.0)) {
        throw ValidationError(
            fmt::format("FTLE needs positive separations and window (delta0 = {}, deltaT = {}, T = {})",
                        delta0, deltaT, T));
    }
    return std::log(deltaT / delta0) / T;
}

ExponentSeries fsle_residual_series(std::span<const double> residual, double eq0, std::size_t t0_index,
                                    double dt, double floor) {
    if (!(dt > 0.0)) {
        throw ValidationError("sampling interval must be positive");
    }
    if (t0_index + 2 > residual.size()) {
        throw ValidationError("residual needs at least two samples from the fault-clear index");
    }
    const double dev0 = std::abs(residual[t0_index] - eq0);
    if (dev0 <= floor) {
        throw ComputationError(fmt::format("initial residual deviation {} pu is below the {} pu floor",
                                           dev0, floor));
    }
    ExponentSeries s;
    s.dt = dt;
    s.kind = SeriesKind::residual_fsle;
    const double log0 = std::log(dev0);
    for (std::size_t k = 1; t0_index + k < residual.size(); ++k) {
        const double dev = std::abs(residual[t0_index + k] - eq0);
        if (dev == 0.0) {
            continue;
        }
        s.lambdas.push_back((std::log(dev) - log0) / (static_cast<double>(k) * dt));
        s.k_offsets.push_back(k);
    }
    if (s.lambdas.empty()) {
        throw ComputationError("residual returns exactly to equilibrium at every offset");
    }
    fill_factors(s);
    return s;
}

DivergenceCurve divergence_curve(const embed::EmbeddedTrajectory& emb,
                                 std::span<const embed::NeighborPair> pairs, simd::Isa isa) {
    const std::size_t n = emb.size();
    const auto block = emb.block();
    std::vector<double> sum(n, 0.0);
    std::vector<std::size_t> count(n, 0);
    std::vector<double> d2(n);
    // Separations at coordinate round-off level count as zero: exactly
    // periodic signals otherwise pair points with |d| ~ 1e-16 and explode the log.
    double norm2 = 0.0;
    for (double v : block.columns) {
        norm2 += v * v;
    }
    const double zero_d2 = 1e-18 * norm2 / static_cast<double>(n);
    // Every pair is followed to a common horizon so the mean at each offset is
    // taken over the same set; the horizon keeps at least half of the pairs.
    std::vector<std::size_t> steps_of;
    steps_of.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
        const std::size_t steps = n - std::max(i, j);
        if (steps < 2) {
            continue;
        }
        std::span<double> out(d2.data(), 1);
        simd::offset_squared_distances(isa, block, i, j, out);
        if (out[0] > zero_d2) {
            steps_of.push_back(steps);
        }
    }
    if (steps_of.empty()) {
        throw ComputationError("no neighbour pair with non-zero initial separation and two evolvable steps");
    }
    std::sort(steps_of.begin(), steps_of.end(), std::greater<>());
    const std::size_t horizon = steps_of[(steps_of.size() - 1) / 2];
    for (const auto& [i, j] : pairs) {
        const std::size_t steps = n - std::max(i, j);
        if (steps < horizon) {
            continue;
        }
        std::span<double> out(d2.data(), horizon);
        simd::offset_squared_distances(isa, block, i, j, out);
        if (out[0] <= zero_d2) {
            continue;
        }
        for (std::size_t k = 0; k < horizon; ++k) {
            if (out[k] > zero_d2) {
                sum[k] += 0.5 * std::log(out[k]);
                ++count[k];
            }
        }
    }
    DivergenceCurve curve;
    std::size_t last = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (count[k] > 0) {
            last = k;
        }
    }
    curve.mean_log.resize(last + 1, std::numeric_limits<double>::quiet_NaN());
    curve.contributors.resize(last + 1, 0);
    for (std::size_t k = 0; k <= last; ++k) {
        if (count[k] > 0) {
            curve.mean_log[k] = sum[k] / static_cast<double>(count[k]);
            curve.contributors[k] = count[k];
        }
    }
    return curve;
}

ExponentSeries slope_series(const DivergenceCurve& curve, double dt) {
    ExponentSeries s;
    s.dt = dt;
    s.kind = SeriesKind::imf_ftle;
    double n = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < curve.mean_log.size(); ++k) {
        if (curve.contributors[k] == 0) {
            continue;
        }
        const double x = static_cast<double>(k) * dt;
        const double y = curve.mean_log[k];
        n += 1.0;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        if (n < 2.0) {
            continue;
        }
        const double den = n * sxx - sx * sx;
        s.lambdas.push_back((n * sxy - sx * sy) / den);
        s.k_offsets.push_back(k);
    }
    if (s.lambdas.empty()) {
        throw ComputationError("divergence curve too short for a slope");
    }
    fill_factors(s);
    return s;
}

ExponentSeries ftle_imf_series(const embed::EmbeddedTrajectory& emb,
                               std::span<const embed::NeighborPair> pairs, simd::Isa isa) {
    if (pairs.empty()) {
        throw ValidationError("FTLE needs at least one neighbour pair");
    }
    return slope_series(divergence_curve(emb, pairs, isa), emb.dt());
}

NoiseMoments noise_bias_variance(double sigma, double T, double deltaT) {
    if (!(T > 0.0) || !(deltaT > 0.0) || !(sigma >= 0.0)) {
        throw ValidationError("noise moments need T > 0, deltaT > 0 and sigma >= 0");
    }
    const double s2 = sigma * sigma;
    return {-s2 / (2.0 * T * deltaT * deltaT), s2 / (T * T * deltaT * deltaT)};
}

}  // namespace stvs::lyapunov
