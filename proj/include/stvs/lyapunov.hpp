#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stvs/embed.hpp"

namespace stvs::lyapunov {

enum class SeriesKind { residual_fsle, imf_ftle };

/// Time-resolved exponents (1/s) and their divergence factors exp(lambda).
struct ExponentSeries {
    std::vector<double> lambdas;
    std::vector<double> divergence_factors;
    std::vector<std::size_t> k_offsets;
    double dt = 0.0;
    SeriesKind kind = SeriesKind::residual_fsle;

    std::size_t size() const noexcept { return lambdas.size(); }
    double min_lambda() const;
    double max_lambda() const;
};

/// Deviation below which a residual is treated as having no dip, in pu.
inline constexpr double kDeviationFloor = 1e-4;

/// (1/T) ln(deltaT / delta0).
double ftle_window(double delta0, double deltaT, double T);

/// lambda_R(k) = ln(|R(t0 + k) - eq0| / |R(t0) - eq0|) / (k dt), k = 1..K.
/// Offsets where the deviation is exactly zero are skipped.
ExponentSeries fsle_residual_series(std::span<const double> residual, double eq0,
                                    std::size_t t0_index, double dt,
                                    double floor = kDeviationFloor);

/// Mean log pair separation <ln d(k)> over neighbour pairs, one entry per
/// offset k = 0..K. Pairs with zero initial separation are dropped. K is the
/// largest horizon that at least half of the pairs can be followed to, and
/// only pairs reaching it contribute.
struct DivergenceCurve {
    std::vector<double> mean_log;
    std::vector<std::size_t> contributors;
};

DivergenceCurve divergence_curve(const embed::EmbeddedTrajectory& emb,
                                 std::span<const embed::NeighborPair> pairs,
                                 simd::Isa isa = simd::active_isa());

/// lambda(k) is the least-squares slope of the curve over k' = 0..k against k' dt.
ExponentSeries slope_series(const DivergenceCurve& curve, double dt);

ExponentSeries ftle_imf_series(const embed::EmbeddedTrajectory& emb,
                               std::span<const embed::NeighborPair> pairs,
                               simd::Isa isa = simd::active_isa());

struct NoiseMoments {
    double bias = 0.0;      // 1/s
    double variance = 0.0;  // 1/s^2
};

/// Small-noise bias -sigma^2/(2 T deltaT^2) and variance sigma^2/(T^2 deltaT^2).
NoiseMoments noise_bias_variance(double sigma, double T, double deltaT);

}  // namespace stvs::lyapunov
