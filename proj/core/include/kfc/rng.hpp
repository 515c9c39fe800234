// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace kfc {

// Deterministic 64-bit generator: xorshift64* seeded through splitmix64.
// Identical seeds produce identical streams on every platform; the exact
// update rules (and all constants) are:
//
//   seeding            state  = splitmix64(seed)
//   splitmix64(x):     x += 0x9E3779B97F4A7C15
//                      x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
//                      x = (x ^ (x >> 27)) * 0x94D049BB133111EB
//                      return x ^ (x >> 31)
//   xorshift64*:       state ^= state >> 12
//                      state ^= state << 25
//                      state ^= state >> 27
//                      output = state * 0x2545F4914F6CDD1D
//
//   uniform [0,1):     (output >> 11) * 2^-53
//   normal:            Box-Muller on two uniforms,
//                      z0 = sqrt(-2 ln u1) cos(2 pi u2),
//                      z1 = sqrt(-2 ln u1) sin(2 pi u2)   (z1 cached)
//
// An Rng is single-owner mutable state. Never share one across threads;
// parallel consumers take independent streams via split().
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [lo, hi). Throws ArgumentError if lo >= hi.
  double uniform(double lo, double hi);

  // Standard normal (mean 0, variance 1).
  double normal();

  // Uniform integer in [0, n), n >= 1. Used for shuffling.
  std::size_t uniform_index(std::size_t n);

  // Child generator for stream `id`; deterministic, does not advance *this.
  Rng split(std::uint64_t id) const;

private:
  std::uint64_t state_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace kfc
