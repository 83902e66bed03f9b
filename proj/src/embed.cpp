#include "stvs/embed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/erf.hpp>
#include <fmt/format.h>

#include "stvs/errors.hpp"

namespace stvs::embed {

namespace {

double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) {
        return 0.0;
    }
    return sab / std::sqrt(saa * sbb);
}

std::vector<double> normal_scores(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> z(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) {
            ++j;
        }
        const double rank = 0.5 * static_cast<double>(i + j);
        const double u = (rank + 0.5) / static_cast<double>(n);
        const double score = std::numbers::sqrt2 * boost::math::erf_inv(2.0 * u - 1.0);
        for (std::size_t k = i; k <= j; ++k) {
            z[order[k]] = score;
        }
        i = j + 1;
    }
    return z;
}

}  // namespace

StateSeries augment_rocov(const std::vector<std::vector<double>>& signals) {
    if (signals.empty()) {
        throw ValidationError("ROCOV augmentation needs at least one channel");
    }
    const std::size_t n = signals.front().size();
    if (n < 2) {
        throw ValidationError("ROCOV augmentation needs at least two samples");
    }
    StateSeries out;
    out.columns.reserve(2 * signals.size());
    for (const auto& s : signals) {
        if (s.size() != n) {
            throw ValidationError("ROCOV channels must have equal length");
        }
        std::vector<double> level(s.begin() + 1, s.end());
        std::vector<double> diff(n - 1);
        for (std::size_t i = 1; i < n; ++i) {
            diff[i - 1] = s[i] - s[i - 1];
        }
        out.columns.push_back(std::move(level));
        out.columns.push_back(std::move(diff));
    }
    return out;
}

StateSeries normalize_columns(StateSeries states) {
    for (auto& col : states.columns) {
        if (col.empty()) {
            continue;
        }
        const double mu = mean_of(col);
        double ss = 0.0;
        for (double& v : col) {
            v -= mu;
            ss += v * v;
        }
        const double rms = std::sqrt(ss / static_cast<double>(col.size()));
        if (rms == 0.0 || !std::isfinite(rms)) {
            std::fill(col.begin(), col.end(), 0.0);
            continue;
        }
        for (double& v : col) {
            v /= rms;
        }
    }
    return states;
}

std::vector<double> mutual_information_curve(std::span<const double> signal, std::size_t max_lag) {
    const auto z = normal_scores(signal);
    std::vector<double> mi(max_lag + 1, 0.0);
    const std::span<const double> zs(z);
    for (std::size_t lag = 0; lag <= max_lag && lag < z.size(); ++lag) {
        const std::size_t len = z.size() - lag;
        const double rho = lag == 0 ? 1.0 : pearson(zs.subspan(0, len), zs.subspan(lag, len));
        const double r2 = std::min(rho * rho, 1.0 - 1e-15);
        mi[lag] = -0.5 * std::log1p(-r2);
    }
    return mi;
}

std::size_t select_delay(std::span<const double> signal) {
    const std::size_t n = signal.size();
    if (n < 32) {
        throw ValidationError(fmt::format("delay selection needs at least 32 samples, got {}", n));
    }
    const double mu = mean_of(signal);
    double var = 0.0;
    for (double v : signal) {
        var += (v - mu) * (v - mu);
    }
    if (!(var > 0.0)) {
        throw ValidationError("delay selection on a constant signal");
    }

    const std::size_t max_lag = n / 4;
    const auto mi = mutual_information_curve(signal, max_lag + 1);

    // chi-square(1) at 99.9 %: n * rho^2 below it is consistent with independence
    const double rho1_sq = 1.0 - std::exp(-2.0 * mi[1]);
    if (rho1_sq * static_cast<double>(n - 1) <= 10.83) {
        return 1;
    }
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        if (mi[lag] < mi[lag - 1] && mi[lag] <= mi[lag + 1]) {
            return lag;
        }
    }
    const std::span<const double> s(signal);
    for (std::size_t lag = 1; lag < n - 1; ++lag) {
        const std::size_t len = n - lag;
        if (pearson(s.subspan(0, len), s.subspan(lag, len)) < 1.0 / std::numbers::e) {
            return lag;
        }
    }
    return std::max<std::size_t>(1, max_lag);
}

EmbeddedTrajectory::EmbeddedTrajectory(std::vector<double> columns, std::size_t count, std::size_t dim,
                                       std::size_t m, std::size_t tau, std::size_t theiler, double dt)
    : columns_(std::move(columns)), count_(count), dim_(dim), m_(m), tau_(tau), theiler_(theiler), dt_(dt) {
    if (count_ < 2 || m_ < 1 || tau_ < 1 || columns_.size() != count_ * dim_) {
        throw ValidationError("malformed embedded trajectory");
    }
}

std::vector<double> EmbeddedTrajectory::point(std::size_t i) const {
    std::vector<double> p(dim_);
    for (std::size_t d = 0; d < dim_; ++d) {
        p[d] = coord(i, d);
    }
    return p;
}

EmbeddedTrajectory delay_embed(const StateSeries& states, std::size_t m, std::size_t tau,
                               std::size_t theiler, double dt) {
    if (m < 1 || tau < 1) {
        throw ValidationError("embedding dimension and delay must be at least 1");
    }
    const std::size_t len = states.length();
    const std::size_t span = (m - 1) * tau;
    if (len <= span + 1) {
        throw ValidationError(fmt::format("{} states are too few for m = {}, tau = {} (need more than {})",
                                          len, m, tau, span + 1));
    }
    const std::size_t count = len - span;
    const std::size_t base_dim = states.dim();
    const std::size_t dim = m * base_dim;
    std::vector<double> columns(count * dim);
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t d = 0; d < base_dim; ++d) {
            const auto& src = states.columns[d];
            std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(k * tau), count,
                        columns.begin() + static_cast<std::ptrdiff_t>((k * base_dim + d) * count));
        }
    }
    return EmbeddedTrajectory(std::move(columns), count, dim, m, tau, theiler, dt);
}

std::vector<NeighborPair> nearest_neighbors(const EmbeddedTrajectory& emb, simd::Isa isa) {
    const std::size_t n = emb.size();
    const std::size_t theiler = emb.theiler();
    const auto block = emb.block();
    std::vector<double> dist(n);
    std::vector<NeighborPair> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        const auto query = emb.point(i);
        simd::squared_distances_to(isa, block, query, 0, dist);
        std::size_t best = n;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t gap = i > j ? i - j : j - i;
            if (gap <= theiler) {
                continue;
            }
            if (dist[j] < best_d) {
                best_d = dist[j];
                best = j;
            }
        }
        if (best < n) {
            pairs.emplace_back(i, best);
        }
    }
    if (pairs.empty()) {
        throw ComputationError(fmt::format("Theiler window {} leaves no admissible neighbour among {} points",
                                           theiler, n));
    }
    return pairs;
}

std::size_t period_samples(double frequency_hz, double dt) {
    if (!(frequency_hz > 0.0) || !(dt > 0.0)) {
        return 1;
    }
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1.0 / (frequency_hz * dt))));
}

}  // namespace stvs::embed
