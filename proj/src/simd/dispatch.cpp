#include <cstdlib>
#include <cstring>

#include "stvs/simd/distance.hpp"

namespace stvs::simd {

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::avx2:
            return "avx2";
        case Isa::scalar:
            break;
    }
    return "scalar";
}

Isa detected_isa() noexcept {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    static const bool has_avx2 = avx2::compiled() && __builtin_cpu_supports("avx2");
    return has_avx2 ? Isa::avx2 : Isa::scalar;
#else
    return Isa::scalar;
#endif
}

Isa active_isa() noexcept {
    static const Isa isa = [] {
        const char* forced = std::getenv("STVS_SIMD");
        if (forced != nullptr && std::strcmp(forced, "scalar") == 0) {
            return Isa::scalar;
        }
        return detected_isa();
    }();
    return isa;
}

void squared_distances_to(Isa isa, const PointBlock& block, std::span<const double> query,
                          std::size_t first, std::span<double> out) {
    if (isa == Isa::avx2 && detected_isa() == Isa::avx2) {
        avx2::squared_distances_to(block, query, first, out);
    } else {
        scalar::squared_distances_to(block, query, first, out);
    }
}

void offset_squared_distances(Isa isa, const PointBlock& block, std::size_t a, std::size_t b,
                              std::span<double> out) {
    if (isa == Isa::avx2 && detected_isa() == Isa::avx2) {
        avx2::offset_squared_distances(block, a, b, out);
    } else {
        scalar::offset_squared_distances(block, a, b, out);
    }
}

}  // namespace stvs::simd
