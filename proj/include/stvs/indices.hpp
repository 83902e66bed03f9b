#pragma once

// Oscillation and recovery indices, their thresholds, and the end-to-end
// assessment of a post-fault record.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stvs/distribution.hpp"
#include "stvs/emd.hpp"
#include "stvs/ingest.hpp"
#include "stvs/lyapunov.hpp"
#include "stvs/oel.hpp"

namespace stvs::indices {

enum class Classification { stable, unstable, critical };

std::string_view classification_name(Classification c) noexcept;

struct ClassifyResult {
    Classification classification = Classification::critical;
    double margin = 0.0;  // percent
};

/// Below threshold - epsilon/2 is stable, above threshold + epsilon/2 is
/// unstable, anything between is critical.
ClassifyResult classify(double index, double threshold, double epsilon);

struct EmbeddingConfig {
    std::size_t m = 4;
    std::optional<std::size_t> tau;
    std::optional<std::size_t> theiler;
};

struct OscillationResult {
    double index = 0.0;
    std::string tag;  // "no-oscillatory-content" when there was nothing to embed
    std::size_t m = 0;
    std::size_t tau = 0;
    std::size_t theiler = 0;
    std::size_t pairs = 0;
    lyapunov::ExponentSeries exponents;
};

/// KL divergence of the system-level IMF divergence-factor histogram from the
/// Gompertz reference centred at 1.
OscillationResult oscillation_index(const emd::DecompositionResult& decomp, double gamma2,
                                    const distribution::Grid& grid, const EmbeddingConfig& embedding = {});

/// Critical IMF index: a distribution spread evenly over the three bins
/// around x = 1, measured against the same reference.
double imf_threshold(const distribution::Grid& grid, double gamma2);

/// Index of the bins making up the critical three-bin distribution.
std::size_t imf_threshold_centre_bin(const distribution::Grid& grid);

struct RecoveryResult {
    double index = 0.0;
    double delta_r0 = 0.0;
    std::string tag;  // "no-dip" below the deviation floor
    std::optional<lyapunov::ExponentSeries> exponents;
};

RecoveryResult recovery_index(std::span<const double> residual, double v_pre, double eq0, double dt,
                              double gamma1, double x_star, const distribution::Grid& grid);

struct GeneratorConfig {
    std::string id;
    double xd_prime = 0.0;
    double p_active = 0.0;
    std::vector<std::pair<double, double>> pickups;  // (E_i, t_i)
    std::vector<oel::CapPoint> lvrt;                 // (V_i, t_i), used as given
};

struct AssessConfig {
    double window = 3.0;
    double lookback = 0.5;
    distribution::Grid imf_grid{20, 0.0, 1.5};
    distribution::Grid residual_grid{40, 0.0, 1.5};
    double gamma2 = 10.0;
    double gamma1 = 10.0;  // used for generators without machine data
    double x_star = 1.0;
    double band_lo = 0.0;
    double band_hi = 10.0;
    double oscillation_epsilon = 0.0;
    std::optional<double> recovery_epsilon;
    std::optional<double> eq0;
    EmbeddingConfig embedding;
    emd::SiftConfig sift;
    oel::SearchSpace search;
};

struct GeneratorTuning {
    std::vector<oel::CapPoint> caps;
    oel::CriticalSignals signals;
    std::optional<oel::TuningResult> tuning;
};

struct GeneratorAssessment {
    std::string id;
    double index = 0.0;
    std::optional<double> threshold;
    std::optional<double> margin;
    std::string classification;  // trip | non-trip | critical | unassessed
    double delta_r0 = 0.0;
    double eq0 = 0.0;
    double v_pre = 0.0;
    std::string tag;
    std::optional<GeneratorTuning> tuning;
};

struct StabilityAssessment {
    double oscillation_index = 0.0;
    double oscillation_threshold = 0.0;
    double oscillation_margin = 0.0;
    double oscillation_epsilon = 0.0;
    Classification oscillation_class = Classification::stable;
    std::string oscillation_tag;
    std::vector<GeneratorAssessment> generators;
    double window_s = 0.0;
};

/// Caps from pickups (through the fitted Q-V line) and LVRT points, then the
/// critical signals and the tuned Gompertz shape for one generator.
GeneratorTuning tune_generator(const ingest::Channel& window_channel, std::span<const double> residual,
                               double v_pre, double eq0, double dt, const GeneratorConfig& machine,
                               const AssessConfig& config);

std::vector<double> prefault_voltage(const ingest::VoltageTrajectory& traj, const AssessConfig& config);

/// Full pipeline over the post-fault window. `window_samples` overrides the
/// configured window length (used by streaming).
StabilityAssessment assess(const ingest::VoltageTrajectory& traj, const AssessConfig& config,
                           const std::vector<GeneratorConfig>& generators,
                           std::optional<std::size_t> window_samples = std::nullopt);

}  // namespace stvs::indices
