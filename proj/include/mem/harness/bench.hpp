#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mem::harness {

enum class BenchDistribution { uniform, gaussian };

struct EntropyBenchOptions {
  std::size_t n = 4096;
  std::size_t q = 1;
  std::size_t k = 3;
  BenchDistribution distribution = BenchDistribution::gaussian;
  int trials = 10;
  std::uint64_t seed = 0;
  /// Also time the brute-force search (the estimates use the tree).
  bool time_brute = true;
};

struct EntropyBenchReport {
  double analytic = 0.0;  // nats: (q/2) ln(2 pi e) for N(0, I), 0 for U[0,1]^q
  std::vector<double> estimates;
  double mean_abs_error = 0.0;
  double tree_seconds = 0.0;
  double brute_seconds = 0.0;  // 0 when not timed
  double total_seconds = 0.0;
};

/// Draws `trials` samples and estimates their entropy. Throws KTooLarge.
EntropyBenchReport entropy_bench(const EntropyBenchOptions& options);

BenchDistribution bench_distribution_from_string(const std::string& s);

struct GradientCase {
  std::string name;
  double max_rel_error = 0.0;
  std::string worst;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

/// Finite-difference checks of every encoder and agent loss on `trials`
/// randomized small instances; one entry per loss with the worst error seen.
std::vector<GradientCase> gradient_suite(int trials, std::uint64_t seed = 0);

}  // namespace mem::harness
