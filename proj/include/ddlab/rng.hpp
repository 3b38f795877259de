#pragma once

#include <cstdint>

namespace ddlab {

// Deterministic per-path random stream. Stream i under master seed s yields
// the same draws no matter which thread consumes it or when: the state is a
// fixed-increment counter (splitmix64), so draw k of stream i is a pure
// function of (s, i, k).
class SubstreamRng {
 public:
  SubstreamRng(std::uint64_t master_seed, std::uint64_t stream) noexcept {
    const std::uint64_t h = mix(master_seed + kGamma);
    state_ = mix(h ^ (stream + kGamma));
  }

  std::uint64_t next_u64() noexcept {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform in [0, 1), 53 random bits.
  double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace ddlab
