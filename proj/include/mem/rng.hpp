#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mem {

/// Seeded generator whose value mappings are fixed here rather than left to
/// the implementation-defined std distributions, so streams are reproducible
/// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Independent stream derived from a base seed and a stream name.
  static Rng stream(std::uint64_t seed, std::string_view name);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n), unbiased.
  std::uint64_t uniform_int(std::uint64_t n);
  /// Standard normal via Box-Muller (one value per call).
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

/// splitmix64 finalizer; used to mix seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace mem
