#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace blockgnn {

// Portable random source: std::mt19937_64 is fully specified by the
// standard, but std::*_distribution is not, so the conversions live here.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n), rejection sampled.
  uint64_t Below(uint64_t n);

 private:
  std::mt19937_64 engine_;
};

uint64_t SplitMix64(uint64_t x);
// FNV-1a followed by SplitMix64 finalization, keyed by `seed`.
uint64_t KeyedHash(std::string_view text, uint64_t seed);

}  // namespace blockgnn
