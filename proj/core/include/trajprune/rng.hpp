#pragma once

#include <array>
#include <cstdint>
#include <optional>

namespace trajprune {

/// SplitMix64, used to expand a 64-bit seed into xoshiro state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  std::uint64_t next() noexcept;

 private:
  std::uint64_t state_;
};

/// xoshiro256** with platform-independent derived distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform integer in [0, bound); bound must be > 0. Unbiased (rejection).
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Standard normal via Box–Muller; the second variate is cached.
  double normal() noexcept;

 private:
  std::array<std::uint64_t, 4> s_{};
  std::optional<double> spare_;
};

/// Derives an independent stream seed from a base seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

}  // namespace trajprune
