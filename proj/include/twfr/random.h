#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace twfr {

// Seeded generator with distribution code written out by hand, so draws are
// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, n). n must be > 0.
  std::size_t index(std::size_t n);
  // Standard normal (Box-Muller, no caching).
  double normal();

 private:
  std::mt19937_64 engine_;
};

// Stable 64-bit mix of a global seed with a string key and an integer.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key, std::int64_t salt);

}  // namespace twfr
