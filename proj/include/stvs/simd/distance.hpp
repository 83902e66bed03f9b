#pragma once

// Squared Euclidean distance kernels over column-major point blocks.
//
// A block stores coordinate d of point j at columns[d * stride + j]. Every
// variant accumulates each output lane over d = 0, 1, ..., dim-1 with a
// separate multiply and add, so the scalar and vector paths agree bit for bit
// and neighbour searches never depend on the instruction set.

#include <cstddef>
#include <span>
#include <string_view>

namespace stvs::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// Best instruction set supported by both this build and the running CPU.
Isa detected_isa() noexcept;

/// detected_isa(), unless STVS_SIMD=scalar forces the reference path.
Isa active_isa() noexcept;

struct PointBlock {
    std::span<const double> columns;
    std::size_t stride = 0;  // number of points
    std::size_t dim = 0;
};

/// out[j] = |block[first + j] - query|^2 for j in [0, out.size()).
void squared_distances_to(Isa isa, const PointBlock& block, std::span<const double> query,
                          std::size_t first, std::span<double> out);

/// out[k] = |block[a + k] - block[b + k]|^2 for k in [0, out.size()).
void offset_squared_distances(Isa isa, const PointBlock& block, std::size_t a, std::size_t b,
                              std::span<double> out);

inline void squared_distances_to(const PointBlock& block, std::span<const double> query,
                                 std::size_t first, std::span<double> out) {
    squared_distances_to(active_isa(), block, query, first, out);
}

inline void offset_squared_distances(const PointBlock& block, std::size_t a, std::size_t b,
                                     std::span<double> out) {
    offset_squared_distances(active_isa(), block, a, b, out);
}

namespace scalar {
void squared_distances_to(const PointBlock& block, std::span<const double> query, std::size_t first,
                          std::span<double> out);
void offset_squared_distances(const PointBlock& block, std::size_t a, std::size_t b,
                              std::span<double> out);
}  // namespace scalar

namespace avx2 {
bool compiled() noexcept;
void squared_distances_to(const PointBlock& block, std::span<const double> query, std::size_t first,
                          std::span<double> out);
void offset_squared_distances(const PointBlock& block, std::size_t a, std::size_t b,
                              std::span<double> out);
}  // namespace avx2

}  // namespace stvs::simd
