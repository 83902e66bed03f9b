#include "stvs/simd/distance.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace stvs::simd::avx2 {

#if defined(__AVX2__)

bool compiled() noexcept { return true; }

// Four output lanes per iteration; each lane sees the same d-ordered
// mul/add sequence as the scalar loop. No FMA on purpose.
void squared_distances_to(const PointBlock& block, std::span<const double> query, std::size_t first,
                          std::span<double> out) {
    const double* cols = block.columns.data();
    const std::size_t n = out.size();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t d = 0; d < block.dim; ++d) {
            const __m256d x = _mm256_loadu_pd(cols + d * block.stride + first + j);
            const __m256d diff = _mm256_sub_pd(x, _mm256_set1_pd(query[d]));
            acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
        }
        _mm256_storeu_pd(out.data() + j, acc);
    }
    if (j < n) {
        scalar::squared_distances_to(block, query, first + j, out.subspan(j));
    }
}

void offset_squared_distances(const PointBlock& block, std::size_t a, std::size_t b,
                              std::span<double> out) {
    const double* cols = block.columns.data();
    const std::size_t n = out.size();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t d = 0; d < block.dim; ++d) {
            const double* col = cols + d * block.stride;
            const __m256d diff =
                _mm256_sub_pd(_mm256_loadu_pd(col + a + k), _mm256_loadu_pd(col + b + k));
            acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
        }
        _mm256_storeu_pd(out.data() + k, acc);
    }
    if (k < n) {
        scalar::offset_squared_distances(block, a + k, b + k, out.subspan(k));
    }
}

#else

bool compiled() noexcept { return false; }

void squared_distances_to(const PointBlock& block, std::span<const double> query, std::size_t first,
                          std::span<double> out) {
    scalar::squared_distances_to(block, query, first, out);
}

void offset_squared_distances(const PointBlock& block, std::size_t a, std::size_t b,
                              std::span<double> out) {
    scalar::offset_squared_distances(block, a, b, out);
}

#endif

}  // namespace stvs::simd::avx2
