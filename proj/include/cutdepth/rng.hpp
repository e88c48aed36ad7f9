#pragma once

#include <cstdint>
#include <random>

namespace cutdepth {

/// Seeded uniform stream backing every random decision in the toolkit.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. A draw takes the top 53 bits of one engine output and scales by
/// 2^-53, so every value is an exact multiple of 2^-53 in [0, 1) and the
/// sequence is bit-identical on every conforming platform. The standard
/// distributions are avoided on purpose: their algorithms are
/// implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  /// One U(0,1) draw in [0, 1). Advances the stream by exactly one step.
  double uniform() {
    ++draws_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// lo + (hi - lo) * uniform(); consumes one draw.
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t seed() const { return seed_; }

  /// Number of draws consumed since construction.
  std::uint64_t draws() const { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
};

/// Derives the seed of work item `index` from a master seed.
///
/// SplitMix64 finalizer applied to master + (index + 1) * 0x9E3779B97F4A7C15.
/// Item streams depend only on (master, index), never on scheduling.
constexpr std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace cutdepth
