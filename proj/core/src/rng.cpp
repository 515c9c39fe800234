// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#include "kfc/rng.hpp"

#include <cmath>

#include "kfc/errors.hpp"

namespace kfc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

Rng::Rng(std::uint64_t seed) : state_(splitmix64(seed)) {
  // splitmix64 maps exactly one input to 0; xorshift64* needs nonzero state.
  if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t Rng::next_u64() {
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  return state_ * 0x2545F4914F6CDD1DULL;
}

double Rng::uniform(double lo, double hi) {
  if (!(lo < hi)) throw ArgumentError("Rng::uniform: requires lo < hi");
  const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  double v = lo + u * (hi - lo);
  if (v >= hi) v = std::nextafter(hi, lo);  // guard rounding at the open end
  return v;
}

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // u1 in (0,1] so the log is finite; u2 in [0,1).
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  cached_normal_ = r * std::sin(kTwoPi * u2);
  has_cached_normal_ = true;
  return r * std::cos(kTwoPi * u2);
}

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw ArgumentError("Rng::uniform_index: n must be >= 1");
  return static_cast<std::size_t>(next_u64() % n);
}

Rng Rng::split(std::uint64_t id) const {
  Rng child(0);
  child.state_ = splitmix64(state_ ^ splitmix64(id + 1));
  if (child.state_ == 0) child.state_ = 0x9E3779B97F4A7C15ULL;
  return child;
}

}  // namespace kfc
