#pragma once

#include <cstdint>
#include <random>

namespace toruscope {

/// Uniform double in [0, 1) with 53 random bits.  Used everywhere instead of
/// std::uniform_real_distribution so that sampled points are identical across
/// standard library implementations.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform01(gen);
}

}  // namespace toruscope
