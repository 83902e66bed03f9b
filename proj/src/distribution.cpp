#include "stvs/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "stvs/errors.hpp"

namespace stvs::distribution {

std::vector<double> Grid::edges() const {
    std::vector<double> e(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    }
    e.back() = hi;
    return e;
}

std::vector<double> Grid::centers() const {
    std::vector<double> c(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        c[i] = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(bins);
    }
    return c;
}

std::size_t Grid::bin_of(double x) const noexcept {
    const double pos = (x - lo) / (hi - lo) * static_cast<double>(bins);
    if (!(pos > 0.0)) {
        return 0;
    }
    if (pos >= static_cast<double>(bins)) {
        return bins - 1;
    }
    return static_cast<std::size_t>(pos);
}

void Grid::validate() const {
    if (bins < 2) {
        throw ValidationError(fmt::format("histogram needs at least 2 bins, got {}", bins));
    }
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw ValidationError(fmt::format("invalid histogram range [{}, {}]", lo, hi));
    }
}

DivergenceHistogram histogram(std::span<const double> factors, const Grid& grid) {
    grid.validate();
    if (factors.empty()) {
        throw ValidationError("histogram of an empty factor list");
    }
    std::vector<std::size_t> counts(grid.bins, 0);
    for (double f : factors) {
        if (std::isnan(f)) {
            throw ComputationError("NaN divergence factor");
        }
        ++counts[grid.bin_of(f)];
    }
    DivergenceHistogram h;
    h.bin_edges = grid.edges();
    h.probabilities.resize(grid.bins);
    const double total = static_cast<double>(factors.size());
    for (std::size_t i = 0; i < grid.bins; ++i) {
        h.probabilities[i] = static_cast<double>(counts[i]) / total;
    }
    return h;
}

double gompertz(double x, double gamma, double x_star) {
    return std::exp(-std::exp(gamma * (x - x_star)));
}

GompertzReference gompertz_reference(double gamma, double x_star, std::span<const double> bin_edges) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw ValidationError(fmt::format("Gompertz shape must be positive, got {}", gamma));
    }
    if (bin_edges.size() < 3) {
        throw ValidationError("Gompertz reference needs at least two bins");
    }
    const std::size_t bins = bin_edges.size() - 1;
    GompertzReference ref;
    ref.gamma = gamma;
    ref.x_star = x_star;
    ref.bin_edges.assign(bin_edges.begin(), bin_edges.end());
    ref.log_probabilities.resize(bins);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < bins; ++i) {
        const double c = 0.5 * (bin_edges[i] + bin_edges[i + 1]);
        ref.log_probabilities[i] = -std::exp(gamma * (c - x_star));
        peak = std::max(peak, ref.log_probabilities[i]);
    }
    double sum = 0.0;
    for (double l : ref.log_probabilities) {
        sum += std::exp(l - peak);
    }
    const double log_norm = peak + std::log(sum);
    ref.probabilities.resize(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        ref.log_probabilities[i] -= log_norm;
        ref.probabilities[i] = std::exp(ref.log_probabilities[i]);
    }
    return ref;
}

GompertzReference gompertz_reference(double gamma, double x_star, const Grid& grid) {
    grid.validate();
    const auto e = grid.edges();
    return gompertz_reference(gamma, x_star, e);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size() || p.empty()) {
        throw ValidationError("KL divergence needs distributions on the same grid");
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) {
            continue;
        }
        if (!(q[i] > 0.0)) {
            throw ValidationError(fmt::format("reference has zero probability in bin {} where p = {}", i, p[i]));
        }
        kl += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(kl, 0.0);
}

double kl_divergence(const DivergenceHistogram& p, const GompertzReference& q) {
    if (p.bin_edges != q.bin_edges) {
        throw ValidationError("histogram and reference use different bin grids");
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < p.probabilities.size(); ++i) {
        if (p.probabilities[i] == 0.0) {
            continue;
        }
        kl += p.probabilities[i] * (std::log(p.probabilities[i]) - q.log_probabilities[i]);
    }
    return std::max(kl, 0.0);
}

}  // namespace stvs::distribution
