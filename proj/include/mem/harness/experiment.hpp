#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mem/agents/training.hpp"

namespace mem::harness {

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::size_t rows = 0;
  double wall_seconds = 0.0;
  std::optional<std::int64_t> reached_success_at;
  std::optional<double> last_eval_return;
  std::filesystem::path csv;
  std::filesystem::path checkpoint;
};

struct ExperimentResult {
  std::filesystem::path output_dir;
  std::string config_hash;
  std::vector<SeedOutcome> seeds;  // in config order
  bool all_ok() const;
};

struct ExperimentOptions {
  /// Worker threads; 0 means one per hardware thread, capped at the seed count.
  unsigned threads = 0;
  /// Appended to the output directory (used by ablate for per-mode folders).
  std::string subdir;
};

/// run.output_dir, or $MEM_OUT_DIR when that is set and non-empty.
std::filesystem::path resolve_output_dir(const agents::RunConfig& config);

/// Trains every seed in its own worker and writes, under the output
/// directory: config.json (resolved), seed_<s>.csv, seed_<s>.ckpt (final
/// parameters, plus seed_<s>_<n>.ckpt every checkpoint_period) and
/// summary.json. A failing seed is recorded in the summary without stopping
/// the others. Throws IoError when the directory cannot be prepared.
ExperimentResult run_experiment(const agents::RunConfig& config, const ExperimentOptions& options = {});

/// One run_experiment per reward mode, each in <output>/<mode>/, all with the
/// same seeds and therefore the same layouts.
std::map<std::string, ExperimentResult> ablate(const agents::RunConfig& config,
                                               const std::vector<agents::IntrinsicMode>& modes,
                                               const ExperimentOptions& options = {});

/// Greedy evaluation of a saved checkpoint on the layout of `seed`. Episode e
/// uses noise seed mix64(base_seed + e). Throws CheckpointCorrupt.
agents::EvalStats evaluate_checkpoint(const std::filesystem::path& checkpoint, const agents::RunConfig& config,
                                      std::uint64_t seed, int episodes, std::uint64_t base_seed = 0);

}  // namespace mem::harness
