#pragma once
// Seeded RNG helpers. mt19937_64 output is pinned by the standard; the
// [0,1) mapping is done by hand because std distributions are not
// reproducible across implementations.

#include <cstdint>
#include <random>

namespace iris {

inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

}  // namespace iris
