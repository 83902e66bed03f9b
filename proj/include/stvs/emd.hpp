#pragma once

// Empirical mode decomposition: univariate sifting and a projection-based
// multivariate variant that keeps IMF levels aligned across channels.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stvs/ingest.hpp"

namespace stvs::emd {

struct SiftConfig {
    double sd_threshold = 0.2;
    int max_iterations = 10;
    int hard_cap = 100;     // iterations allowed while the mode condition still fails
    int max_imfs = 16;
    int directions = 8;     // projection directions for multichannel input
};

struct SiftResult {
    std::vector<double> imf;
    std::vector<double> remainder;
};

using Series = std::vector<double>;

struct DecompositionResult {
    std::vector<std::string> ids;
    std::vector<std::vector<Series>> imfs;  // imfs[channel][level]
    std::vector<Series> residual;           // residual[channel]
    double dt = 0.0;

    std::size_t channel_count() const noexcept { return residual.size(); }
    std::size_t length() const noexcept { return residual.empty() ? 0 : residual.front().size(); }
    std::size_t imf_count() const noexcept;
};

struct ExtremaCount {
    std::size_t maxima = 0;
    std::size_t minima = 0;
    std::size_t zero_crossings = 0;

    std::size_t extrema() const noexcept { return maxima + minima; }
};

ExtremaCount count_extrema(std::span<const double> x);

/// |#extrema - #zero crossings| <= 1.
bool satisfies_mode_condition(std::span<const double> x);

std::vector<std::size_t> local_maxima(std::span<const double> x);
std::vector<std::size_t> local_minima(std::span<const double> x);

/// Extracts one IMF, or nullopt when the signal has too few extrema to carry
/// an oscillation (it is already a trend).
std::optional<SiftResult> sift(std::span<const double> signal, const SiftConfig& config = {});

/// Decomposes several equally long channels together. Constant channels are
/// left out of the projections; they get all-zero IMFs and keep the signal
/// as residual.
DecompositionResult decompose_channels(const std::vector<Series>& channels,
                                       std::vector<std::string> ids, double dt,
                                       const SiftConfig& config = {});

DecompositionResult decompose(const ingest::VoltageTrajectory& traj, const SiftConfig& config = {});

/// zero crossings / (2 * span), span = (n - 1) * dt.
double zero_crossing_frequency(std::span<const double> imf, double dt);

/// Drops IMFs whose zero-crossing frequency falls outside [f_min, f_max].
/// The dropped content is discarded, not folded into the residual.
DecompositionResult filter_imfs_by_frequency(const DecompositionResult& decomp, double f_min,
                                             double f_max);

}  // namespace stvs::emd
