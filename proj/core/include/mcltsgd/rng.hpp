#pragma once

#include <cstdint>

namespace mcltsgd::rng {

// Counter-based stream: the generator state is a pure function of
// (seed, stream_index), so replication r of an experiment always sees the
// same draws no matter how work is scheduled across threads.
//
// Construction: four xoshiro256** state words from a SplitMix64 sequence
// keyed by seed XOR golden-ratio-weighted stream index. Normal deviates via
// Box-Muller on 53-bit uniforms (the spare deviate is cached per stream).
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal deviate.
  double normal();
  // +1 or -1 with equal probability.
  double rademacher();

 private:
  std::uint64_t state_[4];
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace mcltsgd::rng
