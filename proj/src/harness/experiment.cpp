#include "mem/harness/experiment.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "mem/ad/checkpoint.hpp"
#include "mem/errors.hpp"
#include "mem/harness/config_io.hpp"
#include "mem/harness/csv.hpp"

namespace mem::harness {

namespace fs = std::filesystem;
using agents::RunConfig;

bool ExperimentResult::all_ok() const {
  for (const auto& s : seeds) {
    if (!s.ok) return false;
  }
  return !seeds.empty();
}

fs::path resolve_output_dir(const RunConfig& config) {
  const char* env = std::getenv("MEM_OUT_DIR");
  return env && *env ? fs::path(env) : fs::path(config.run.output_dir);
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) throw IoError("cannot write " + path.string());
}

SeedOutcome run_seed(const RunConfig& config, std::uint64_t seed, const fs::path& dir) {
  SeedOutcome o;
  o.seed = seed;
  const std::string stem = "seed_" + std::to_string(seed);
  o.csv = dir / (stem + ".csv");
  o.checkpoint = dir / (stem + ".ckpt");
  try {
    CsvWriter csv(o.csv);
    agents::RunHooks hooks;
    hooks.on_row = [&](const agents::LogRow& row) {
      csv.write(row);
      if (row.eval_return) o.last_eval_return = row.eval_return;
    };
    hooks.on_checkpoint = [&](const ad::Checkpoint& ckpt, std::int64_t at) {
      ad::save_checkpoint(dir / (stem + "_" + std::to_string(at) + ".ckpt"), ckpt);
    };
    const agents::RunResult r = agents::train(config, seed, hooks);
    csv.close();
    ad::save_checkpoint(o.checkpoint, r.checkpoint);
    o.rows = r.log.rows.size();
    o.wall_seconds = r.log.wall_seconds;
    o.reached_success_at = r.log.reached_success_at;
    o.ok = true;
  } catch (const std::exception& e) {
    o.error = e.what();
  }
  return o;
}

nlohmann::json summary_json(const ExperimentResult& r) {
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& s : r.seeds) {
    nlohmann::json j = {{"seed", s.seed}, {"ok", s.ok}, {"rows", s.rows}, {"wall_seconds", s.wall_seconds},
                        {"csv", s.csv.filename().string()}};
    j["reached_success_at"] = s.reached_success_at ? nlohmann::json(*s.reached_success_at) : nlohmann::json();
    j["last_eval_return"] = s.last_eval_return ? nlohmann::json(*s.last_eval_return) : nlohmann::json();
    if (!s.ok) j["error"] = s.error;
    seeds.push_back(j);
  }
  return {{"config_hash", r.config_hash}, {"all_ok", r.all_ok()}, {"seeds", seeds}};
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& config, const ExperimentOptions& options) {
  validate(config);
  ExperimentResult result;
  result.output_dir = resolve_output_dir(config);
  if (!options.subdir.empty()) result.output_dir /= options.subdir;
  result.config_hash = config_hash(config);
  std::error_code ec;
  fs::create_directories(result.output_dir, ec);
  if (ec) throw IoError("cannot create " + result.output_dir.string() + ": " + ec.message());
  write_text(result.output_dir / "config.json", dump_config(config));

  const auto& seeds = config.run.seeds;
  result.seeds.resize(seeds.size());
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(seeds.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < seeds.size();) result.seeds[i] = run_seed(config, seeds[i], result.output_dir);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  write_text(result.output_dir / "summary.json", summary_json(result).dump(2) + "\n");
  return result;
}

std::map<std::string, ExperimentResult> ablate(const RunConfig& config, const std::vector<agents::IntrinsicMode>& modes,
                                               const ExperimentOptions& options) {
  std::map<std::string, ExperimentResult> out;
  for (auto m : modes) {
    RunConfig c = config;
    c.exploration.mode = m;
    ExperimentOptions o = options;
    o.subdir = (fs::path(options.subdir) / agents::to_string(m)).string();
    out[agents::to_string(m)] = run_experiment(c, o);
  }
  return out;
}

agents::EvalStats evaluate_checkpoint(const fs::path& checkpoint, const RunConfig& config, std::uint64_t seed,
                                      int episodes, std::uint64_t base_seed) {
  const ad::Checkpoint ckpt = ad::load_checkpoint(checkpoint);
  const envs::GridSpec spec = config.env_for_seed(seed);
  const agents::GreedyAgent agent(config, spec, ckpt);
  return agents::evaluate_policy(
      spec, [&](const envs::GridEnv&, const envs::MultiViewObs& o) { return agent.act(o); }, episodes, base_seed);
}

}  // namespace mem::harness
