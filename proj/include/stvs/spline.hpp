#pragma once

#include <span>
#include <vector>

namespace stvs {

/// Natural cubic spline through (x[i], y[i]), x strictly ascending, evaluated
/// at the integer abscissae 0, 1, ..., n-1. Two knots give the straight line.
std::vector<double> natural_spline_on_grid(std::span<const double> x, std::span<const double> y,
                                           std::size_t n);

}  // namespace stvs
