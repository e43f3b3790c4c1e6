// Acceptance suite: one PASS/FAIL line per criterion.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "mem/agents/training.hpp"
#include "mem/encoder/losses.hpp"
#include "mem/encoder/probe.hpp"
#include "mem/encoder/trainer.hpp"
#include "mem/exploration/entropy.hpp"
#include "mem/exploration/intrinsic.hpp"
#include "mem/harness/bench.hpp"
#include "mem/harness/csv.hpp"

using namespace mem;
using Clock = std::chrono::steady_clock;

namespace {

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

Verdict a1() {
  harness::EntropyBenchOptions o;  // gaussian, q=1, n=4096, k=3, 10 trials
  const auto r = harness::entropy_bench(o);
  return {r.mean_abs_error < 0.1 && r.total_seconds < 5.0,
          fmt("gaussian q=1 n=4096 k=3 trials=10: MAE %.4f nats vs %.4f (< 0.1), %.2f s (< 5 s)", r.mean_abs_error,
              r.analytic, r.total_seconds)};
}

Verdict a2() {
  Rng rng(2);
  int mismatches = 0, instances = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t q = i % 2 ? 8 : 2, k = std::array<std::size_t, 3>{1, 3, 5}[i % 3], n = 1000;
    std::vector<double> coords(n * q);
    for (double& c : coords) c = rng.normal();
    // Snap a quarter of the coordinates to a coarse lattice so exact distance ties occur.
    for (std::size_t c = 0; c < coords.size(); c += 4) coords[c] = std::round(coords[c] * 2.0) / 2.0;
    const exploration::PointSet pts(n, q, std::move(coords));
    const exploration::KdTree tree(pts);
    bool ok = true;
    for (std::size_t p = 0; p < n && ok; ++p) {
      const auto a = tree.nearest(p, k);
      const auto b = exploration::knn_brute(pts, p, k);
      for (std::size_t j = 0; j < k; ++j) ok = ok && a[j].index == b[j].index && same_bits(a[j].distance, b[j].distance);
    }
    mismatches += ok ? 0 : 1;
    ++instances;
  }
  return {mismatches == 0, fmt("%d/%d instances (n=1000, q in {2,8}, k in {1,3,5}) bit-identical to brute force",
                               instances - mismatches, instances)};
}

Verdict a3() {
  const auto cases = harness::gradient_suite(100, 3);
  bool ok = true;
  std::string worst;
  double max_err = 0.0;
  for (const auto& c : cases) {
    ok = ok && c.max_rel_error < 1e-4 && c.checked > 0;
    if (c.max_rel_error >= max_err) {
      max_err = c.max_rel_error;
      worst = c.name;
    }
  }
  return {ok, fmt("%zu losses x 100 instances: max relative error %.2e (%s) (< 1e-4)", cases.size(), max_err,
                  worst.c_str())};
}

Verdict a4() {
  const auto t0 = Clock::now();
  std::vector<double> shared, specific;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng data = Rng::stream(seed, "data"), init = Rng::stream(seed, "init");
    const auto offsets = encoder::draw_view_offsets({}, data);
    const agents::EncoderSettings defaults;
    encoder::EncoderNet enc({8, defaults.hidden, defaults.feature_dim}, init);
    encoder::DiscriminatorNet disc(defaults.feature_dim, defaults.hidden, 2, init);
    encoder::EncoderTrainer trainer(enc, disc, {});
    const std::size_t batch = agents::AgentConfig{}.batch_size;
    for (int step = 0; step < 2000; ++step) {
      const auto obs = encoder::sample_offset_views(offsets, batch, data);
      std::vector<const envs::MultiViewObs*> ptrs;
      for (const auto& o : obs) ptrs.push_back(&o);
      trainer.step(ptrs);
    }
    const auto test = encoder::sample_offset_views(offsets, 500, data);
    std::vector<const envs::MultiViewObs*> ptrs;
    for (const auto& o : test) ptrs.push_back(&o);
    std::vector<std::size_t> labels;
    const auto [x, y] = enc.encode_rows(encoder::stack_views(ptrs, &labels));
    Rng probe = Rng::stream(seed, "probe");
    shared.push_back(encoder::linear_probe(x, labels, 2, probe).test_accuracy);
    specific.push_back(encoder::linear_probe(y, labels, 2, probe).test_accuracy);
  }
  const double secs = since(t0), ms = median(shared), my = median(specific);
  std::string per;
  for (std::size_t s = 0; s < shared.size(); ++s) per += fmt(" %.3f/%.3f", specific[s], shared[s]);
  return {my >= 0.9 && ms <= 0.6 && secs < 60.0,
          fmt("median probe accuracy specific %.3f (>= 0.9), shared %.3f (<= 0.6), %.1f s (< 60 s); per seed "
              "specific/shared:%s",
              my, ms, secs, per.c_str())};
}

Verdict a5() {
  const auto r = exploration::multiview_intrinsic_rewards({exploration::PointSet::from_scalars({0, 1, 3})},
                                                          exploration::PointSet::from_scalars({0, 0, 0}), 1);
  const double want[3] = {0.3466, 0.3466, 0.5493};
  bool ok = r.size() == 3;
  for (std::size_t i = 0; ok && i < 3; ++i) ok = std::abs(r[i] - want[i]) <= 1e-4;
  const double h = exploration::estimate_entropy(exploration::PointSet::from_scalars({0, 1, 3}), 1);
  ok = ok && std::abs(h - 2.6) <= 1e-3;
  const std::vector<double> e1{1, 0}, e2{0, 1}, neg{-1, 0};
  const double d1 = encoder::loss_diff(e1, e2), d2 = encoder::loss_diff(e1, e1), d3 = encoder::loss_diff(e1, neg);
  ok = ok && d1 == 2.0 && d2 == 3.0 && d3 == 2.0;
  return {ok, fmt("intrinsic (%.4f, %.4f, %.4f), entropy %.4f, mixed constraint {%g, %g, %g}", r[0], r[1], r[2], h,
                  d1, d2, d3)};
}

std::vector<std::string> csv_lines(const agents::RunLog& log) {
  std::vector<std::string> out;
  out.reserve(log.rows.size());
  for (const auto& r : log.rows) out.push_back(harness::csv_row(r));
  return out;
}

std::string column(const std::string& line, int index) {
  std::stringstream ss(line);
  std::string cell;
  for (int i = 0; i <= index; ++i) std::getline(ss, cell, ',');
  return cell;
}

Verdict a6() {
  agents::RunConfig c;
  c.run.t_max = 10000;
  c.exploration.beta0 = 0.0;
  agents::RunConfig off = c;
  off.exploration.mode = agents::IntrinsicMode::none;
  const auto t0 = Clock::now();
  const auto a = csv_lines(agents::train(c, 0).log);
  const auto b = csv_lines(agents::train(off, 0).log);
  std::size_t differing = 0;
  bool intrinsic_active = false;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    for (int col : {3, 6, 11}) differing += column(a[i], col) != column(b[i], col);
    intrinsic_active = intrinsic_active || std::stod(column(a[i], 4)) != 0.0;
  }
  const bool ok = a.size() == 10000 && b.size() == 10000 && differing == 0 && intrinsic_active;
  return {ok, fmt("10k-step runs (beta0=0 vs reward mode none): %zu differing extrinsic/total/policy_loss cells, "
                  "intrinsic path active: %s, %.0f s",
                  differing, intrinsic_active ? "yes" : "no", since(t0))};
}

agents::RunConfig schedule_config() {
  agents::RunConfig c;
  c.run.t_max = 100001;
  c.agent.warmup_steps = c.run.t_max;  // acting and logging only
  c.run.eval_period = 0;
  return c;
}

agents::RunConfig on_policy_config() {
  agents::RunConfig c;
  c.agent.loop = agents::LoopVariant::on_policy;
  c.exploration.k = 5;
  c.exploration.beta0 = 0.1;
  c.run.episodes = 30;
  c.run.eval_period = 10;
  return c;
}

Verdict a8() {
  agents::RunConfig learning;
  learning.run.t_max = 3000;
  struct Case {
    const char* name;
    agents::RunConfig config;
    std::uint64_t seed;
  };
  const std::vector<Case> cases{{"off-policy 3k steps", learning, 4},
                                {"off-policy schedule 100k steps", schedule_config(), 5},
                                {"on-policy 30 episodes", on_policy_config(), 6}};
  std::string detail;
  bool ok = true;
  for (const auto& c : cases) {
    const auto t0 = Clock::now();
    const bool same = csv_lines(agents::train(c.config, c.seed).log) == csv_lines(agents::train(c.config, c.seed).log);
    ok = ok && same;
    detail += fmt("%s%s: %s (%.0f s)", detail.empty() ? "" : "; ", c.name, same ? "identical" : "DIFFERENT", since(t0));
  }
  return {ok, detail};
}

Verdict a9() {
  const auto off = agents::train(schedule_config(), 0).log;
  double worst = 0.0;
  for (std::int64_t t : {0, 10000, 100000}) {
    worst = std::max(worst, std::abs(off.rows[static_cast<std::size_t>(t)].beta - 0.05 * std::pow(1.0 - 1e-5, t)));
  }
  std::vector<agents::EpisodeTrace> traces;
  agents::RunHooks hooks;
  hooks.on_episode = [&](const agents::EpisodeTrace& t) { traces.push_back(t); };
  const auto on = agents::train(on_policy_config(), 0, hooks).log;
  bool episodes_ok = on.rows.size() == traces.size();
  double on_worst = 0.0;
  for (std::size_t e = 0; episodes_ok && e < traces.size(); ++e) {
    const auto& row = on.rows[e];
    double total = 0.0;
    for (std::size_t t = 0; t < traces[e].actions.size(); ++t) {
      total += traces[e].extrinsic[t] + traces[e].beta * traces[e].intrinsic[t];
    }
    on_worst = std::max(on_worst, std::abs(row.beta - 0.1 * std::pow(1.0 - 1e-5, static_cast<double>(e))));
    episodes_ok = episodes_ok && traces[e].beta == row.beta && std::abs(total - row.total_reward) <= 1e-9 &&
                  (e == 0 || row.beta < on.rows[e - 1].beta);
  }
  return {worst <= 1e-12 && on_worst <= 1e-12 && episodes_ok,
          fmt("off-policy beta at t={0,1e4,1e5} max error %.1e; on-policy %zu episodes: per-episode beta max error "
              "%.1e, constant within episodes and decreasing: %s",
              worst, on.rows.size(), on_worst, episodes_ok ? "yes" : "no")};
}

struct A7Options {
  double budget_seconds = 900.0;
  int seeds = 10;
  long cap = 100000;
  unsigned threads = 0;
};

Verdict a7(const A7Options& opt) {
  struct Job {
    std::string arm;
    agents::RunConfig config;
    std::uint64_t seed;
    std::optional<double> steps;  // steps to success; cap when never reached
  };
  agents::RunConfig mem_cfg;
  mem_cfg.run.t_max = opt.cap;
  mem_cfg.run.stop_at_success = true;
  agents::RunConfig base_cfg = mem_cfg;
  base_cfg.exploration.beta0 = 0.0;
  agents::RunConfig re3_cfg = mem_cfg;
  re3_cfg.exploration.mode = agents::IntrinsicMode::re3_log1p;
  std::vector<Job> jobs;
  for (int s = 0; s < opt.seeds; ++s) {
    jobs.push_back({"mem", mem_cfg, static_cast<std::uint64_t>(s), {}});
    jobs.push_back({"beta0=0", base_cfg, static_cast<std::uint64_t>(s), {}});
  }
  for (int s = 0; s < opt.seeds; ++s) jobs.push_back({"re3_log1p", re3_cfg, static_cast<std::uint64_t>(s), {}});

  const auto t0 = Clock::now();
  const auto deadline = t0 + std::chrono::duration<double>(opt.budget_seconds);
  std::atomic<std::size_t> next{0};
  std::atomic<long> steps_done{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      if (Clock::now() >= deadline) return;
      agents::RunHooks hooks;
      hooks.should_stop = [&] { return Clock::now() >= deadline; };
      const auto log = agents::train(jobs[i].config, jobs[i].seed, hooks).log;
      steps_done += static_cast<long>(log.rows.size());
      if (log.reached_success_at) {
        jobs[i].steps = static_cast<double>(*log.reached_success_at);
      } else if (!log.cancelled) {
        jobs[i].steps = static_cast<double>(opt.cap);
      }
    }
  };
  const unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  const double secs = since(t0);

  auto summarize = [&](const std::string& arm, std::optional<double>& med) {
    std::vector<double> v;
    int total = 0;
    for (const auto& j : jobs) {
      if (j.arm != arm) continue;
      ++total;
      if (j.steps) v.push_back(*j.steps);
    }
    if (static_cast<int>(v.size()) == total) med = median(v);
    return fmt("%s %zu/%d runs finished%s", arm.c_str(), v.size(), total,
               v.size() == static_cast<std::size_t>(total) ? fmt(", median %.0f steps", median(v)).c_str() : "");
  };
  std::optional<double> m_mem, m_base, m_re3;
  const std::string s_mem = summarize("mem", m_mem), s_base = summarize("beta0=0", m_base),
                    s_re3 = summarize("re3_log1p", m_re3);
  const bool complete = m_mem && m_base;
  const bool faster = complete && *m_mem < *m_base;
  std::string re3_note = "not finished";
  if (m_re3 && complete) {
    re3_note = *m_re3 >= *m_mem ? "at or below MEM" : "better than MEM";
  }
  return {complete && faster && secs < opt.budget_seconds,
          fmt("%s; %s; %s (re3_log1p %s, reported only); %ld env steps in %.0f s on %u thread(s) (budget %.0f s, "
              "cap %ld steps, %d seeds)",
              s_mem.c_str(), s_base.c_str(), s_re3.c_str(), re3_note.c_str(), steps_done.load(), secs, threads,
              opt.budget_seconds, opt.cap, opt.seeds)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::vector<std::string> only;
  A7Options a7opt;
  bool strict = false;
  std::string report_path;
  app.add_option("--only", only, "Criteria to run, e.g. A1 A5")->delimiter(',');
  app.add_option("--a7-budget", a7opt.budget_seconds, "Wall-clock budget for A7 in seconds");
  app.add_option("--a7-seeds", a7opt.seeds, "Seeds per arm for A7");
  app.add_option("--a7-cap", a7opt.cap, "Step cap per A7 run");
  app.add_option("--threads", a7opt.threads, "Worker threads for A7 (0: one per core)");
  app.add_option("--report", report_path, "Also write the result lines to this file");
  app.add_flag("--strict", strict, "Exit non-zero when any criterion fails");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5},
      {"A6", a6}, {"A7", [&] { return a7(a7opt); }},  {"A8", a8}, {"A9", a9}};
  const std::set<std::string> selected(only.begin(), only.end());
  std::FILE* report = report_path.empty() ? nullptr : std::fopen(report_path.c_str(), "w");
  if (!report_path.empty() && !report) {
    std::fprintf(stderr, "cannot write %s\n", report_path.c_str());
    return 2;
  }
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    for (std::FILE* f : {stdout, report}) {
      if (!f) continue;
      std::fprintf(f, "%s %s  %s\n", id.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str());
      std::fflush(f);
    }
  }
  if (report) std::fclose(report);
  return strict && failed ? 1 : 0;
}
