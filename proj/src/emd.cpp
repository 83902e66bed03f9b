#include "stvs/emd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>
#include <fmt/format.h>

#include "stvs/errors.hpp"
#include "stvs/spline.hpp"

namespace stvs::emd {

namespace {

using Direction = std::vector<double>;

double radical_inverse(std::size_t index, std::size_t base) {
    double inv = 1.0 / static_cast<double>(base);
    double f = inv;
    double r = 0.0;
    while (index > 0) {
        r += f * static_cast<double>(index % base);
        index /= base;
        f *= inv;
    }
    return r;
}

std::vector<Direction> projection_directions(std::size_t dim, int count) {
    std::vector<Direction> dirs;
    if (dim == 1) {
        dirs.push_back({1.0});
        dirs.push_back({-1.0});
        return dirs;
    }
    const auto total = static_cast<std::size_t>(std::max(count, 2));
    if (dim == 2) {
        for (std::size_t k = 0; k < total; ++k) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(total);
            dirs.push_back({std::cos(a), std::sin(a)});
        }
        return dirs;
    }
    static constexpr std::size_t primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                             43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};
    const std::size_t half = total / 2;
    for (std::size_t k = 0; k < half; ++k) {
        Direction d(dim);
        double norm2 = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const std::size_t base = primes[c % std::size(primes)] + (c / std::size(primes)) * 100;
            const double u = radical_inverse(k + 1, base);
            d[c] = std::numbers::sqrt2 * boost::math::erf_inv(2.0 * u - 1.0);
            norm2 += d[c] * d[c];
        }
        if (norm2 == 0.0) {
            d[0] = 1.0;
            norm2 = 1.0;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& v : d) {
            v *= inv;
        }
        Direction neg(d);
        for (double& v : neg) {
            v = -v;
        }
        dirs.push_back(std::move(d));
        dirs.push_back(std::move(neg));
    }
    return dirs;
}

template <typename Better>
std::vector<std::size_t> plateau_extrema(std::span<const double> x, Better better) {
    std::vector<std::size_t> out;
    const std::size_t n = x.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        if (better(x[i], x[i - 1])) {
            std::size_t j = i;
            while (j + 1 < n && x[j + 1] == x[i]) {
                ++j;
            }
            if (j + 1 < n && better(x[i], x[j + 1])) {
                out.push_back((i + j) / 2);
            }
            i = j + 1;
        } else {
            ++i;
        }
    }
    return out;
}

// Knot abscissae for one envelope: extrema, two mirrored on each side, and the
// end sample itself whenever it pokes outside the nearest extremum.
std::vector<double> envelope_knots(std::span<const double> p, const std::vector<std::size_t>& ext,
                                   bool upper) {
    const std::size_t n = p.size();
    const double last = static_cast<double>(n - 1);
    auto outside = [upper](double end, double extremum) {
        return upper ? end > extremum : end < extremum;
    };
    std::vector<double> knots;
    knots.reserve(ext.size() + 6);
    for (std::size_t k = std::min<std::size_t>(2, ext.size()); k-- > 0;) {
        knots.push_back(-static_cast<double>(ext[k]));
    }
    if (outside(p.front(), p[ext.front()])) {
        knots.push_back(0.0);
    }
    for (const auto e : ext) {
        knots.push_back(static_cast<double>(e));
    }
    if (outside(p.back(), p[ext.back()])) {
        knots.push_back(last);
    }
    const std::size_t m = ext.size();
    for (std::size_t k = 0; k < std::min<std::size_t>(2, m); ++k) {
        knots.push_back(2.0 * last - static_cast<double>(ext[m - 1 - k]));
    }
    return knots;
}

double sample_at_knot(std::span<const double> x, double t) {
    const double last = static_cast<double>(x.size() - 1);
    double idx = t;
    if (idx < 0.0) {
        idx = -idx;
    } else if (idx > last) {
        idx = 2.0 * last - idx;
    }
    return x[static_cast<std::size_t>(std::llround(idx))];
}

std::vector<double> spline_through(std::span<const double> x, const std::vector<double>& knots) {
    std::vector<double> values(knots.size());
    for (std::size_t k = 0; k < knots.size(); ++k) {
        values[k] = sample_at_knot(x, knots[k]);
    }
    return natural_spline_on_grid(knots, values, x.size());
}

// Mean envelope across projection directions; false when no direction shows a
// maximum, i.e. the stacked signal has become a trend.
bool mean_envelope(const std::vector<Series>& h, const std::vector<Direction>& dirs,
                   std::vector<Series>& mean) {
    const std::size_t dim = h.size();
    const std::size_t n = h.front().size();
    for (auto& m : mean) {
        std::fill(m.begin(), m.end(), 0.0);
    }
    std::vector<double> proj(n);
    std::size_t used = 0;
    for (const auto& d : dirs) {
        std::fill(proj.begin(), proj.end(), 0.0);
        for (std::size_t c = 0; c < dim; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                proj[i] += d[c] * h[c][i];
            }
        }
        const auto maxima = local_maxima(proj);
        if (maxima.empty()) {
            continue;
        }
        const auto knots = envelope_knots(proj, maxima, true);
        for (std::size_t c = 0; c < dim; ++c) {
            const auto env = spline_through(h[c], knots);
            for (std::size_t i = 0; i < n; ++i) {
                mean[c][i] += env[i];
            }
        }
        ++used;
    }
    if (used == 0) {
        return false;
    }
    const double inv = 1.0 / static_cast<double>(used);
    for (auto& m : mean) {
        for (double& v : m) {
            v *= inv;
        }
    }
    return true;
}

bool has_oscillation(std::span<const double> x) {
    const auto c = count_extrema(x);
    return c.maxima >= 1 && c.minima >= 1;
}

// One sifting pass over all active channels; empty result when nothing is left to extract.
std::vector<Series> sift_stack(const std::vector<Series>& signal, const std::vector<Direction>& dirs,
                               const SiftConfig& config) {
    std::vector<Series> h = signal;
    std::vector<Series> mean(h.size(), Series(h.front().size()));
    for (int iter = 1; iter <= config.hard_cap; ++iter) {
        if (!mean_envelope(h, dirs, mean)) {
            if (iter == 1) {
                return {};
            }
            break;
        }
        double num = 0.0;
        double den = 0.0;
        for (std::size_t c = 0; c < h.size(); ++c) {
            for (std::size_t i = 0; i < h[c].size(); ++i) {
                num += mean[c][i] * mean[c][i];
                den += h[c][i] * h[c][i];
                h[c][i] -= mean[c][i];
            }
        }
        const double sd = den > 0.0 ? num / den : 0.0;
        const bool settled = sd < config.sd_threshold || iter >= config.max_iterations;
        const bool modes = std::all_of(h.begin(), h.end(),
                                       [](const Series& s) { return satisfies_mode_condition(s); });
        if (settled && modes) {
            break;
        }
    }
    return h;
}

bool is_constant(const Series& s) {
    return std::all_of(s.begin(), s.end(), [&](double v) { return v == s.front(); });
}

}  // namespace

std::size_t DecompositionResult::imf_count() const noexcept {
    std::size_t total = 0;
    for (const auto& ch : imfs) {
        total += ch.size();
    }
    return total;
}

std::vector<std::size_t> local_maxima(std::span<const double> x) {
    return plateau_extrema(x, [](double a, double b) { return a > b; });
}

std::vector<std::size_t> local_minima(std::span<const double> x) {
    return plateau_extrema(x, [](double a, double b) { return a < b; });
}

ExtremaCount count_extrema(std::span<const double> x) {
    ExtremaCount c;
    c.maxima = local_maxima(x).size();
    c.minima = local_minima(x).size();
    int last_sign = 0;
    for (double v : x) {
        const int s = (v > 0.0) - (v < 0.0);
        if (s == 0) {
            continue;
        }
        if (last_sign != 0 && s != last_sign) {
            ++c.zero_crossings;
        }
        last_sign = s;
    }
    return c;
}

bool satisfies_mode_condition(std::span<const double> x) {
    const auto c = count_extrema(x);
    const auto e = static_cast<long long>(c.extrema());
    const auto z = static_cast<long long>(c.zero_crossings);
    return std::llabs(e - z) <= 1;
}

std::optional<SiftResult> sift(std::span<const double> signal, const SiftConfig& config) {
    if (signal.size() < 4 || !has_oscillation(signal)) {
        return std::nullopt;
    }
    const std::vector<Series> stack{Series(signal.begin(), signal.end())};
    auto h = sift_stack(stack, projection_directions(1, 2), config);
    if (h.empty()) {
        return std::nullopt;
    }
    SiftResult out;
    out.imf = std::move(h.front());
    out.remainder.resize(signal.size());
    for (std::size_t i = 0; i < signal.size(); ++i) {
        out.remainder[i] = signal[i] - out.imf[i];
    }
    return out;
}

DecompositionResult decompose_channels(const std::vector<Series>& channels,
                                       std::vector<std::string> ids, double dt,
                                       const SiftConfig& config) {
    if (channels.empty()) {
        throw ValidationError("decomposition needs at least one channel");
    }
    if (ids.size() != channels.size()) {
        throw ValidationError("one id per channel required");
    }
    const std::size_t n = channels.front().size();
    for (const auto& ch : channels) {
        if (ch.size() != n) {
            throw ValidationError("channels must have equal length");
        }
    }

    DecompositionResult out;
    out.ids = std::move(ids);
    out.dt = dt;
    out.imfs.assign(channels.size(), {});
    out.residual = channels;

    std::vector<std::size_t> active;
    for (std::size_t c = 0; c < channels.size(); ++c) {
        if (!is_constant(channels[c])) {
            active.push_back(c);
        }
    }
    if (active.empty() || n < 4) {
        return out;
    }
    const auto dirs = projection_directions(active.size(), config.directions);

    for (int level = 0; level < config.max_imfs; ++level) {
        std::vector<Series> rem;
        rem.reserve(active.size());
        bool any_oscillation = false;
        for (const auto c : active) {
            rem.push_back(out.residual[c]);
            any_oscillation = any_oscillation || has_oscillation(rem.back());
        }
        if (!any_oscillation) {
            break;
        }
        auto imf = sift_stack(rem, dirs, config);
        if (imf.empty()) {
            break;
        }
        for (std::size_t c = 0; c < channels.size(); ++c) {
            out.imfs[c].emplace_back(n, 0.0);
        }
        for (std::size_t a = 0; a < active.size(); ++a) {
            const std::size_t c = active[a];
            auto& res = out.residual[c];
            for (std::size_t i = 0; i < n; ++i) {
                res[i] -= imf[a][i];
            }
            out.imfs[c].back() = std::move(imf[a]);
        }
    }
    return out;
}

DecompositionResult decompose(const ingest::VoltageTrajectory& traj, const SiftConfig& config) {
    std::vector<Series> channels;
    std::vector<std::string> ids;
    for (const auto& ch : traj.channels()) {
        channels.push_back(ch.voltage);
        ids.push_back(ch.id);
    }
    return decompose_channels(channels, std::move(ids), traj.dt(), config);
}

double zero_crossing_frequency(std::span<const double> imf, double dt) {
    if (imf.size() < 2) {
        return 0.0;
    }
    const double span = static_cast<double>(imf.size() - 1) * dt;
    return static_cast<double>(count_extrema(imf).zero_crossings) / (2.0 * span);
}

DecompositionResult filter_imfs_by_frequency(const DecompositionResult& decomp, double f_min,
                                             double f_max) {
    if (!(f_min >= 0.0) || !(f_max > f_min)) {
        throw ValidationError(fmt::format("invalid frequency band [{}, {}] Hz", f_min, f_max));
    }
    DecompositionResult out;
    out.ids = decomp.ids;
    out.residual = decomp.residual;
    out.dt = decomp.dt;
    out.imfs.resize(decomp.imfs.size());
    for (std::size_t c = 0; c < decomp.imfs.size(); ++c) {
        for (const auto& imf : decomp.imfs[c]) {
            const double f = zero_crossing_frequency(imf, decomp.dt);
            if (f >= f_min && f <= f_max) {
                out.imfs[c].push_back(imf);
            }
        }
    }
    return out;
}

}  // namespace stvs::emd
