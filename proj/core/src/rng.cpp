#include "mcltsgd/rng.hpp"

#include <cmath>
#include <numbers>

namespace mcltsgd::rng {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Stream::Stream(std::uint64_t seed, std::uint64_t stream_index) {
  std::uint64_t key = seed ^ (0x9E3779B97F4A7C15ULL * (stream_index + 1));
  for (auto& word : state_) word = splitmix64(key);
}

std::uint64_t Stream::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Stream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Stream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  // Box-Muller; u is kept away from 0 so the log stays finite.
  double u = 0.0;
  do {
    u = uniform();
  } while (u <= 0.0);
  const double v = uniform();
  const double r = std::sqrt(-2.0 * std::log(u));
  const double angle = 2.0 * std::numbers::pi * v;
  cached_normal_ = r * std::sin(angle);
  has_cached_ = true;
  return r * std::cos(angle);
}

double Stream::rademacher() {
  return (next_u64() >> 63) ? 1.0 : -1.0;
}

}  // namespace mcltsgd::rng
