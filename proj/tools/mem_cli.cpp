// mem: train, evaluate, ablate and benchmark from the command line.
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mem/errors.hpp"
#include "mem/harness/bench.hpp"
#include "mem/harness/config_io.hpp"
#include "mem/harness/experiment.hpp"

using namespace mem;

namespace {

void print_seeds(const harness::ExperimentResult& r) {
  for (const auto& s : r.seeds) {
    if (!s.ok) {
      std::printf("  seed %llu FAILED: %s\n", static_cast<unsigned long long>(s.seed), s.error.c_str());
      continue;
    }
    std::printf("  seed %llu: %zu rows, %.1f s", static_cast<unsigned long long>(s.seed), s.rows, s.wall_seconds);
    if (s.last_eval_return) std::printf(", last eval return %.4f", *s.last_eval_return);
    if (s.reached_success_at) std::printf(", reached success at step %lld", static_cast<long long>(*s.reached_success_at));
    std::printf("\n");
  }
}

std::vector<agents::IntrinsicMode> parse_modes(const std::string& list) {
  std::vector<agents::IntrinsicMode> out;
  std::stringstream ss(list);
  for (std::string m; std::getline(ss, m, ',');) out.push_back(agents::intrinsic_mode_from_string(m));
  if (out.empty()) throw ConfigInvalid("--modes is empty");
  return out;
}

void apply_bench_setting(harness::EntropyBenchOptions& b, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw ConfigInvalid("expected key=value, got '" + kv + "'");
  const std::string key = kv.substr(0, eq);
  const std::string value = kv.substr(eq + 1);
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(value, &used);
  } catch (const std::exception&) {
  }
  if (used == 0 || used != value.size()) throw ConfigInvalid("'" + key + "' needs a non-negative integer");
  if (key == "n") b.n = v;
  else if (key == "q") b.q = v;
  else if (key == "k") b.k = v;
  else if (key == "trials") b.trials = static_cast<int>(v);
  else if (key == "seed") b.seed = v;
  else throw ConfigInvalid("unknown benchmark setting '" + key + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view exploration maximization: training, evaluation and diagnostics"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, modes = "mem,re3_log1p,none";
  unsigned threads = 0;

  auto* train = app.add_subcommand("train", "Train every seed of a config");
  train->add_option("config", config_path, "JSON config")->required();
  train->add_option("--threads", threads, "Worker threads (0: one per core)");

  std::uint64_t eval_seed = 0, eval_base = 0;
  int episodes = 10;
  auto* eval = app.add_subcommand("eval", "Greedy evaluation of a checkpoint");
  eval->add_option("checkpoint", checkpoint_path, "Checkpoint file")->required();
  eval->add_option("config", config_path, "Config the checkpoint was trained with")->required();
  eval->add_option("--seed", eval_seed, "Run seed whose layout to use");
  eval->add_option("--episodes", episodes, "Evaluation episodes")->check(CLI::PositiveNumber);
  eval->add_option("--base-seed", eval_base, "Noise seed base for the episodes");

  harness::EntropyBenchOptions bench;
  std::string dist = "gaussian";
  bool no_brute = false;
  auto* eb = app.add_subcommand("entropy-bench", "k-NN entropy estimator accuracy and search timing");
  eb->add_option("distribution", dist, "gaussian or uniform")->check(CLI::IsMember({"gaussian", "uniform"}));
  eb->add_option("--n", bench.n, "Samples per trial");
  eb->add_option("--q", bench.q, "Dimension");
  eb->add_option("--k", bench.k, "Neighbor rank");
  eb->add_option("--trials", bench.trials, "Trials");
  eb->add_option("--seed", bench.seed, "Sampling seed");
  eb->add_flag("--no-brute", no_brute, "Skip the brute-force timing");
  std::vector<std::string> bench_pairs;
  eb->add_option("settings", bench_pairs, "Overrides as key=value: n, q, k, trials, seed");

  int gc_trials = 100;
  std::uint64_t gc_seed = 0;
  double gc_tol = 1e-4;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every loss");
  gc->add_option("--trials", gc_trials, "Random instances");
  gc->add_option("--seed", gc_seed, "Seed");
  gc->add_option("--tolerance", gc_tol, "Maximum relative error");

  auto* ab = app.add_subcommand("ablate", "Train one config under several reward modes");
  ab->add_option("config", config_path, "JSON config")->required();
  ab->add_option("--modes", modes, "Comma-separated reward modes");
  ab->add_option("--threads", threads, "Worker threads (0: one per core)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const auto cfg = harness::load_config(config_path);
      const auto r = harness::run_experiment(cfg, {threads, ""});
      std::printf("config %s -> %s\n", r.config_hash.c_str(), r.output_dir.string().c_str());
      print_seeds(r);
      return r.all_ok() ? 0 : 1;
    }
    if (*eval) {
      const auto cfg = harness::load_config(config_path);
      const auto st = harness::evaluate_checkpoint(checkpoint_path, cfg, eval_seed, episodes, eval_base);
      std::printf("episodes %d  mean_return %.6f  std_return %.6f  success_rate %.3f\n", st.episodes, st.mean_return,
                  st.std_return, st.success_rate);
      return 0;
    }
    if (*eb) {
      for (const auto& kv : bench_pairs) apply_bench_setting(bench, kv);
      bench.distribution = harness::bench_distribution_from_string(dist);
      bench.time_brute = !no_brute;
      const auto r = harness::entropy_bench(bench);
      for (std::size_t t = 0; t < r.estimates.size(); ++t) std::printf("trial %zu  %.6f\n", t, r.estimates[t]);
      std::printf("analytic %.6f  mae %.6f\n", r.analytic, r.mean_abs_error);
      std::printf("tree %.3f s", r.tree_seconds);
      if (bench.time_brute) std::printf("  brute %.3f s", r.brute_seconds);
      std::printf("  total %.3f s\n", r.total_seconds);
      return 0;
    }
    if (*gc) {
      bool ok = true;
      for (const auto& c : harness::gradient_suite(gc_trials, gc_seed)) {
        const bool pass = c.max_rel_error < gc_tol && c.checked > 0;
        ok = ok && pass;
        std::printf("%-24s max_rel_error %.3e  checked %zu  skipped %zu  %s\n", c.name.c_str(), c.max_rel_error,
                    c.checked, c.skipped, pass ? "ok" : ("FAIL at " + c.worst).c_str());
      }
      return ok ? 0 : 1;
    }
    if (*ab) {
      const auto cfg = harness::load_config(config_path);
      bool ok = true;
      for (const auto& [mode, r] : harness::ablate(cfg, parse_modes(modes), {threads, ""})) {
        std::printf("%s -> %s\n", mode.c_str(), r.output_dir.string().c_str());
        print_seeds(r);
        ok = ok && r.all_ok();
      }
      return ok ? 0 : 1;
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
