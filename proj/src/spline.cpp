#include "stvs/spline.hpp"

#include <algorithm>
#include <cstddef>

#include "stvs/errors.hpp"

namespace stvs {

std::vector<double> natural_spline_on_grid(std::span<const double> x, std::span<const double> y,
                                           std::size_t n) {
    const std::size_t k = x.size();
    if (k < 2 || y.size() != k) {
        throw ComputationError("spline needs at least two knots");
    }
    for (std::size_t i = 1; i < k; ++i) {
        if (!(x[i] > x[i - 1])) {
            throw ComputationError("spline knots must be strictly ascending");
        }
    }

    // Second derivatives from the tridiagonal system (Thomas algorithm).
    std::vector<double> m(k, 0.0);
    if (k > 2) {
        std::vector<double> c(k, 0.0), d(k, 0.0);
        for (std::size_t i = 1; i + 1 < k; ++i) {
            const double h0 = x[i] - x[i - 1];
            const double h1 = x[i + 1] - x[i];
            const double a = h0;
            const double b = 2.0 * (h0 + h1);
            const double rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            const double denom = b - a * c[i - 1];
            c[i] = h1 / denom;
            d[i] = (rhs - a * d[i - 1]) / denom;
        }
        for (std::size_t i = k - 2; i >= 1; --i) {
            m[i] = d[i] - c[i] * m[i + 1];
        }
    }

    std::vector<double> out(n);
    std::size_t seg = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double t = static_cast<double>(j);
        while (seg + 2 < k && t > x[seg + 1]) {
            ++seg;
        }
        const double h = x[seg + 1] - x[seg];
        const double a = (x[seg + 1] - t) / h;
        const double b = (t - x[seg]) / h;
        out[j] = a * y[seg] + b * y[seg + 1] +
                 ((a * a * a - a) * m[seg] + (b * b * b - b) * m[seg + 1]) * h * h / 6.0;
    }
    return out;
}

}  // namespace stvs
