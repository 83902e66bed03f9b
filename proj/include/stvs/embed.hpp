#pragma once

// Two-stage phase-space reconstruction: ROCOV augmentation followed by
// time-delay stacking, plus Theiler-windowed nearest-neighbour search.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "stvs/simd/distance.hpp"

namespace stvs::embed {

/// Column-major state sequence: columns[d][i] is coordinate d at time i.
struct StateSeries {
    std::vector<std::vector<double>> columns;

    std::size_t dim() const noexcept { return columns.size(); }
    std::size_t length() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
};

/// x_i = [v_i, v_i - v_{i-1}] per channel, interleaved by channel. Output
/// length is input length - 1.
StateSeries augment_rocov(const std::vector<std::vector<double>>& signals);

/// Zero mean and unit RMS per coordinate; constant coordinates become zero.
StateSeries normalize_columns(StateSeries states);

/// Delay from the first local minimum of mutual information. Returns 1 when
/// lag-one dependence is indistinguishable from independence.
std::size_t select_delay(std::span<const double> signal);

/// Mutual information at each lag 0..max_lag under a Gaussian copula of the
/// rank-transformed signal.
std::vector<double> mutual_information_curve(std::span<const double> signal, std::size_t max_lag);

class EmbeddedTrajectory {
public:
    EmbeddedTrajectory(std::vector<double> columns, std::size_t count, std::size_t dim,
                       std::size_t m, std::size_t tau, std::size_t theiler, double dt);

    std::size_t size() const noexcept { return count_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t m() const noexcept { return m_; }
    std::size_t tau() const noexcept { return tau_; }
    std::size_t theiler() const noexcept { return theiler_; }
    double dt() const noexcept { return dt_; }

    double coord(std::size_t point, std::size_t d) const noexcept { return columns_[d * count_ + point]; }
    std::vector<double> point(std::size_t i) const;
    simd::PointBlock block() const noexcept { return {columns_, count_, dim_}; }

private:
    std::vector<double> columns_;
    std::size_t count_;
    std::size_t dim_;
    std::size_t m_;
    std::size_t tau_;
    std::size_t theiler_;
    double dt_;
};

/// Point i stacks states i, i + tau, ..., i + (m-1) tau.
EmbeddedTrajectory delay_embed(const StateSeries& states, std::size_t m, std::size_t tau,
                               std::size_t theiler, double dt);

using NeighborPair = std::pair<std::size_t, std::size_t>;

/// For each point with an admissible partner, its nearest neighbour j with
/// |i - j| > theiler; ties go to the smaller j.
std::vector<NeighborPair> nearest_neighbors(const EmbeddedTrajectory& emb,
                                            simd::Isa isa = simd::active_isa());

/// Oscillation period in samples for a frequency estimate, at least one sample.
std::size_t period_samples(double frequency_hz, double dt);

}  // namespace stvs::embed
