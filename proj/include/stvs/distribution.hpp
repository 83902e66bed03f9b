#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace stvs::distribution {

/// Uniform binning of [lo, hi].
struct Grid {
    std::size_t bins = 20;
    double lo = 0.0;
    double hi = 1.5;

    std::vector<double> edges() const;
    std::vector<double> centers() const;
    double width() const noexcept { return (hi - lo) / static_cast<double>(bins); }
    /// Bin index with out-of-range values clamped to the edge bins.
    std::size_t bin_of(double x) const noexcept;
    void validate() const;
};

struct DivergenceHistogram {
    std::vector<double> bin_edges;
    std::vector<double> probabilities;
    std::string out_of_range_policy = "clamp";
};

struct GompertzReference {
    double gamma = 0.0;
    double x_star = 0.0;
    std::vector<double> bin_edges;
    std::vector<double> probabilities;
    std::vector<double> log_probabilities;  // exact even where probabilities underflow
};

DivergenceHistogram histogram(std::span<const double> factors, const Grid& grid);

/// Unnormalized sigma(x) = exp(-exp(gamma (x - x_star))).
double gompertz(double x, double gamma, double x_star);

/// sigma at bin centres, normalized to unit sum.
GompertzReference gompertz_reference(double gamma, double x_star, std::span<const double> bin_edges);
GompertzReference gompertz_reference(double gamma, double x_star, const Grid& grid);

/// sum p ln(p / q) with 0 ln 0 = 0. Throws when q has a zero where p has mass.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// Against a Gompertz reference; grids must match exactly.
double kl_divergence(const DivergenceHistogram& p, const GompertzReference& q);

}  // namespace stvs::distribution
