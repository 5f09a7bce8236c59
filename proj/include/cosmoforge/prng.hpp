#pragma once

#include <array>
#include <cstdint>

namespace cosmoforge {

// xoshiro256** seeded through splitmix64. Every draw helper below is defined
// in terms of next_u64() only, so streams are identical on every platform.
class Prng {
 public:
  explicit Prng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() noexcept;

  // lo + (hi - lo) * uniform(); equals lo when lo == hi.
  double uniform(double lo, double hi) noexcept;

  // Uniform integer in [0, n) by rejection; n must be >= 1.
  std::uint64_t bounded(std::uint64_t n) noexcept;

  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

// Derives an independent seed for sub-stream `index` of `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace cosmoforge
