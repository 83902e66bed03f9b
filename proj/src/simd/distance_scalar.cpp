#include "stvs/simd/distance.hpp"

namespace stvs::simd::scalar {

void squared_distances_to(const PointBlock& block, std::span<const double> query, std::size_t first,
                          std::span<double> out) {
    const double* cols = block.columns.data();
    for (std::size_t j = 0; j < out.size(); ++j) {
        double acc = 0.0;
        for (std::size_t d = 0; d < block.dim; ++d) {
            const double diff = cols[d * block.stride + first + j] - query[d];
            acc += diff * diff;
        }
        out[j] = acc;
    }
}

void offset_squared_distances(const PointBlock& block, std::size_t a, std::size_t b,
                              std::span<double> out) {
    const double* cols = block.columns.data();
    for (std::size_t k = 0; k < out.size(); ++k) {
        double acc = 0.0;
        for (std::size_t d = 0; d < block.dim; ++d) {
            const double* col = cols + d * block.stride;
            const double diff = col[a + k] - col[b + k];
            acc += diff * diff;
        }
        out[k] = acc;
    }
}

}  // namespace stvs::simd::scalar
