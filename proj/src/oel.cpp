#include "stvs/oel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "stvs/errors.hpp"

namespace stvs::oel {

namespace {

struct Quartic {
    double c3, c2, c1, c0;  // monic: V^4 + c3 V^3 + c2 V^2 + c1 V + c0

    double value(double v) const { return (((v + c3) * v + c2) * v + c1) * v + c0; }
    double slope(double v) const { return ((4.0 * v + 3.0 * c3) * v + 2.0 * c2) * v + c1; }
};

Quartic quartic_for(double e, const MachineData& m) {
    const double c = m.xd_prime / m.qv.k1;
    const double k2 = m.qv.k2;
    const double xp = m.xd_prime * m.p_active;
    return {2.0 * c, c * c - 2.0 * c * k2 - e * e, -2.0 * c * c * k2, c * c * k2 * k2 + xp * xp};
}

double polish(const Quartic& q, double v) {
    for (int it = 0; it < 8; ++it) {
        const double d = q.slope(v);
        if (d == 0.0) {
            break;
        }
        const double step = q.value(v) / d;
        v -= step;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(v))) {
            break;
        }
    }
    return v;
}

}  // namespace

QvFit fit_qv(std::span<const double> v, std::span<const double> q) {
    if (v.size() != q.size() || v.size() < 2) {
        throw ValidationError("Q-V fit needs at least two paired samples");
    }
    if (std::all_of(q.begin(), q.end(), [&](double x) { return x == q.front(); })) {
        throw ValidationError("reactive power is constant; the Q-V line is not identifiable");
    }
    const double n = static_cast<double>(v.size());
    double sq = 0.0, sqq = 0.0, sv = 0.0, sqv = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        sq += q[i];
        sqq += q[i] * q[i];
        sv += v[i];
        sqv += q[i] * v[i];
    }
    const double det = n * sqq - sq * sq;
    if (!(det > 0.0)) {
        throw ValidationError("singular Q-V normal equations");
    }
    QvFit fit;
    fit.k1 = (n * sqv - sq * sv) / det;
    fit.k2 = (sqq * sv - sq * sqv) / det;
    return fit;
}

double ev_residual(double v, double e, const MachineData& m) {
    const double c = m.xd_prime / m.qv.k1;
    const double a = v + c * (v - m.qv.k2) / v;
    const double b = m.xd_prime * m.p_active / v;
    return a * a + b * b - e * e;
}

std::vector<double> voltage_cap_roots(double e, const MachineData& m) {
    if (!(e > 0.0)) {
        throw ValidationError(fmt::format("pickup EMF must be positive, got {}", e));
    }
    if (m.qv.k1 == 0.0 || !std::isfinite(m.qv.k1)) {
        throw ValidationError("Q-V slope K1 must be non-zero");
    }
    const Quartic q = quartic_for(e, m);
    Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    companion(3, 2) = 1.0;
    companion(0, 3) = -q.c0;
    companion(1, 3) = -q.c1;
    companion(2, 3) = -q.c2;
    companion(3, 3) = -q.c3;
    const Eigen::EigenSolver<Eigen::Matrix4d> solver(companion, false);
    if (solver.info() != Eigen::Success) {
        throw ComputationError("quartic eigenvalue solve did not converge");
    }
    std::vector<double> roots;
    for (const auto& z : solver.eigenvalues()) {
        if (std::abs(z.imag()) >= 1e-9 * std::max(1.0, std::abs(z.real()))) {
            continue;
        }
        const double v = polish(q, z.real());
        if (v > 0.0 && v < 2.0 && std::abs(ev_residual(v, e, m)) < 1e-9) {
            roots.push_back(v);
        }
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                roots.end());
    return roots;
}

double voltage_cap(double e, const MachineData& m, double v_ref) {
    const auto roots = voltage_cap_roots(e, m);
    if (roots.empty()) {
        throw ComputationError(fmt::format(
            "pickup EMF {} pu is unreachable: no admissible voltage in (0, 2) pu on the fitted Q-V line", e));
    }
    return *std::min_element(roots.begin(), roots.end(), [&](double a, double b) {
        return std::abs(a - v_ref) < std::abs(b - v_ref);
    });
}

CriticalSignals construct_critical_signals(std::span<const double> residual, double eq0, double dt,
                                           std::span<const CapPoint> caps,
                                           const lyapunov::ExponentSeries& exponents) {
    if (caps.empty()) {
        throw ValidationError("critical signals need at least one voltage-cap pickup");
    }
    if (residual.size() < 2 || !(dt > 0.0)) {
        throw ValidationError("critical signals need a sampled residual window");
    }
    const std::size_t n = residual.size();
    CriticalSignals out;
    out.lambda_slow = std::min(exponents.max_lambda(), 0.0);
    out.lambda_fast = std::min(exponents.min_lambda(), 0.0);

    const double t_end = static_cast<double>(n - 1) * dt;
    double highest_cap = -std::numeric_limits<double>::infinity();
    for (const auto& cap : caps) {
        if (!(cap.t > 0.0)) {
            throw ValidationError(fmt::format("pickup delay must be positive, got {}", cap.t));
        }
        highest_cap = std::max(highest_cap, cap.v);
        if (eq0 <= cap.v) {
            out.status = SignalStatus::trivially_tripping;
            return out;
        }
        if (cap.t <= t_end) {
            bool below = true;
            for (std::size_t k = 0; k < n && static_cast<double>(k) * dt <= cap.t; ++k) {
                below = below && residual[k] < cap.v;
            }
            if (below) {
                out.status = SignalStatus::trivially_tripping;
                return out;
            }
        }
    }
    if (*std::min_element(residual.begin(), residual.end()) >= highest_cap) {
        out.status = SignalStatus::trivially_safe;
        return out;
    }

    auto build = [&](double lambda, std::size_t* binding) {
        double amp = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < caps.size(); ++i) {
            const double a = (eq0 - caps[i].v) * std::exp(-lambda * caps[i].t);
            if (a < amp) {
                amp = a;
                if (binding != nullptr) {
                    *binding = i;
                }
            }
        }
        std::vector<double> s(n);
        for (std::size_t k = 0; k < n; ++k) {
            // Admissible evolutions stay at or above 0 pu.
            s[k] = std::max(eq0 - amp * std::exp(lambda * static_cast<double>(k) * dt), 0.0);
        }
        return s;
    };
    out.s1 = build(out.lambda_slow, &out.binding_cap);
    out.s2 = build(out.lambda_fast, nullptr);
    return out;
}

std::vector<double> SearchSpace::gammas() const {
    if (gamma_points == 0 || !(gamma_lo > 0.0) || !(gamma_hi >= gamma_lo)) {
        throw ValidationError("empty or invalid gamma search range");
    }
    std::vector<double> g(gamma_points);
    for (std::size_t i = 0; i < gamma_points; ++i) {
        const double f = gamma_points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(gamma_points - 1);
        g[i] = gamma_lo * std::pow(gamma_hi / gamma_lo, f);
    }
    g.back() = gamma_points == 1 ? gamma_lo : gamma_hi;
    return g;
}

std::vector<double> SearchSpace::x_stars() const {
    if (x_star_points == 0 || !(x_star_hi >= x_star_lo)) {
        throw ValidationError("empty or invalid x* search range");
    }
    std::vector<double> x(x_star_points);
    for (std::size_t i = 0; i < x_star_points; ++i) {
        const double f = x_star_points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(x_star_points - 1);
        x[i] = x_star_lo + (x_star_hi - x_star_lo) * f;
    }
    return x;
}

namespace {

struct Weighted {
    distribution::DivergenceHistogram hist;
    double weight = 0.0;  // 0 when the residual has no dip
};

Weighted weighted_histogram(std::span<const double> residual, double v_pre, double eq0, double dt,
                            const distribution::Grid& grid) {
    Weighted w;
    w.hist.bin_edges = grid.edges();
    w.hist.probabilities.assign(grid.bins, 0.0);
    if (residual.empty() || std::abs(residual[0] - eq0) <= lyapunov::kDeviationFloor) {
        return w;
    }
    const auto series = lyapunov::fsle_residual_series(residual, eq0, 0, dt);
    w.hist = distribution::histogram(series.divergence_factors, grid);
    w.weight = std::abs(v_pre - residual[0]);
    return w;
}

double weighted_kl(const Weighted& w, const distribution::GompertzReference& ref) {
    if (w.weight == 0.0) {
        return 0.0;
    }
    return w.weight * distribution::kl_divergence(w.hist, ref);
}

}  // namespace

double recovery_index_value(std::span<const double> residual, double v_pre, double eq0, double dt,
                            double gamma, double x_star, const distribution::Grid& grid) {
    const auto w = weighted_histogram(residual, v_pre, eq0, dt, grid);
    if (w.weight == 0.0) {
        return 0.0;
    }
    return weighted_kl(w, distribution::gompertz_reference(gamma, x_star, grid));
}

TuningResult tune_gamma(std::span<const double> s1, std::span<const double> s2, double eq0, double v_pre,
                        double dt, const distribution::Grid& grid, const SearchSpace& search,
                        std::optional<double> epsilon) {
    const auto gammas = search.gammas();
    const auto xs = search.x_stars();
    const auto w1 = weighted_histogram(s1, v_pre, eq0, dt, grid);
    const auto w2 = weighted_histogram(s2, v_pre, eq0, dt, grid);
    const auto edges = grid.edges();

    struct Point {
        double d1, d2;
    };
    std::vector<Point> table(gammas.size() * xs.size());
    double f_star = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < gammas.size(); ++g) {
        for (std::size_t x = 0; x < xs.size(); ++x) {
            const auto ref = distribution::gompertz_reference(gammas[g], xs[x], edges);
            auto& p = table[g * xs.size() + x];
            p = {weighted_kl(w1, ref), weighted_kl(w2, ref)};
            f_star = std::min(f_star, std::abs(p.d1 - p.d2));
        }
    }
    const double eps = epsilon.value_or(f_star);
    if (!(eps >= 0.0)) {
        throw ValidationError("detection tolerance must be non-negative");
    }
    for (std::size_t g = 0; g < gammas.size(); ++g) {
        for (std::size_t x = 0; x < xs.size(); ++x) {
            const auto& p = table[g * xs.size() + x];
            if (std::abs(p.d1 - p.d2) <= f_star + eps) {
                TuningResult r;
                r.gamma1 = gammas[g];
                r.x_star = xs[x];
                r.d_s1 = p.d1;
                r.d_s2 = p.d2;
                r.f_star = f_star;
                r.epsilon = eps;
                r.d_critical_r = 0.5 * (p.d1 + p.d2);
                return r;
            }
        }
    }
    throw ComputationError("tuner found no admissible grid point");
}

}  // namespace stvs::oel
