// Copyright (c) 2026 the curaug authors
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "curaug/core.hpp"

namespace curaug {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t v, int k) {
  return (v << k) | (v >> (64 - k));
}

}  // namespace detail

/**
 * Seedable 64-bit generator (xoshiro256++ seeded through splitmix64).
 *
 * The entire sequence is fixed by the seed and by the exact operations
 * performed here, so equal seeds give equal streams on every platform.
 * All bounded-draw helpers are rejection-based and unbiased. Streams are
 * cheap values; give each concurrent task its own, never share one.
 */
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) {
      word = detail::splitmix64(sm);
    }
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
      state_[0] = 1;
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  /** Uniform draw from [0, bound). bound must be positive. */
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) {
      throw InvalidParameter("uniform_below: bound must be positive");
    }
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) {
        return x % bound;
      }
    }
  }

  /** Uniform draw from [lo, hi], inclusive. */
  int uniform_int(int lo, int hi) {
    if (lo > hi) {
      throw InvalidParameter("uniform_int: empty range");
    }
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - lo + 1;
    return lo + static_cast<int>(uniform_below(span));
  }

  /** Uniform double in [0, 1), 53 bits of precision. */
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /** Standard normal via Marsaglia's polar method (second value discarded). */
  double normal() {
    for (;;) {
      const double u = 2.0 * uniform01() - 1.0;
      const double v = 2.0 * uniform01() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) {
        return u * std::sqrt(-2.0 * std::log(s) / s);
      }
    }
  }

  /**
   * Gamma(shape, 1) draw, Marsaglia-Tsang squeeze/rejection.
   * Shapes below 1 use the boost Gamma(shape) = Gamma(shape+1) * U^(1/shape).
   */
  double gamma(double shape) {
    if (!(shape > 0.0)) {
      throw InvalidParameter("gamma: shape must be positive");
    }
    if (shape < 1.0) {
      double u;
      do {
        u = uniform01();
      } while (u == 0.0);
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      const double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) {
        continue;
      }
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) {
        return d * v;
      }
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
        return d * v;
      }
    }
  }

private:
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace curaug
