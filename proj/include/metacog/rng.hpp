// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "metacog/types.hpp"

namespace metacog {

// All randomness flows through mt19937_64 plus the hand-rolled draws below.
// std::uniform_real_distribution and friends are implementation-defined, which
// would break the byte-identical-reruns contract across standard libraries.
using Rng = std::mt19937_64;

/// Uniform draw in [0, 1) with 53 bits of mantissa.
inline Scalar uniform01(Rng& rng) {
  return static_cast<Scalar>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [lo, hi] (inclusive).
inline int uniform_int(Rng& rng, int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(rng() % span);
}

/// Standard normal via Box-Muller; consumes exactly two uniforms per call.
inline Scalar normal01(Rng& rng) {
  const Scalar u1 = 1.0 - uniform01(rng);  // (0, 1]
  const Scalar u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Inverse-CDF draw from an explicit probability vector.
inline Index sample_categorical(Rng& rng, const Vector& probs) {
  const Scalar u = uniform01(rng);
  Scalar cum = 0.0;
  for (Index v = 0; v < probs.size(); ++v) {
    cum += probs[v];
    if (u < cum) return v;
  }
  return probs.size() - 1;  // guard against rounding at the top end
}

}  // namespace metacog
