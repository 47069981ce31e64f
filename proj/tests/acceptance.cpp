// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: prints one PASS/FAIL/SKIP line per criterion and exits
// non-zero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "../tools/cli.hpp"
#include "atkse/attack.hpp"
#include "atkse/baselines.hpp"
#include "atkse/bundle.hpp"
#include "atkse/eval.hpp"
#include "atkse/sbm.hpp"
#include "test_util.hpp"

using namespace atkse;

namespace {

enum class Status { pass, fail, skip };

struct Verdict {
  Status status;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Graph effectiveness_sbm(std::uint64_t seed) {
  SbmConfig c;
  c.num_nodes = 100;
  c.num_classes = 2;
  c.p_in = 0.1;
  c.p_out = 0.01;
  c.num_features = 20;
  c.feature_shift = 0.5;
  c.seed = seed;
  return generate_sbm(c);
}

AttackConfig default_attack(const Graph& g, std::uint64_t seed) {
  AttackConfig c;
  c.budget = edge_budget(g, 0.05);
  c.seed = seed;
  return c;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

// 1. Analytic vs central-difference gradient through the gradcheck command.
Verdict gradient_oracle() {
  atkse::testing::TempDir tmp("atkse-accept");
  const auto t0 = Clock::now();
  std::ostringstream out;
  std::ostringstream err;
  const std::string g = (tmp / "g").string();
  if (cli::run({"gen-sbm", "--nodes", "30", "--classes", "2", "--p-in", "0.2", "--p-out", "0.02", "--seed", "0",
                "--out", g},
               out, err) != 0) {
    return {Status::fail, "gen-sbm failed: " + err.str()};
  }
  std::string detail;
  bool ok = true;
  for (const char* act : {"identity", "relu"}) {
    std::ostringstream o;
    const int code = cli::run({"gradcheck", "--graph", g, "--entries", "50", "--fd-step", "1e-4", "--tol", "1e-3",
                               "--activation", act},
                              o, err);
    const std::string text = o.str();
    const auto pos = text.find("max relative error ");
    const std::string err_value =
        pos == std::string::npos ? "?" : text.substr(pos + 19, text.find(' ', pos + 19) - (pos + 19));
    detail += std::string(act) + " max rel err " + err_value + "; ";
    ok = ok && code == 0;
  }
  const double elapsed = seconds_since(t0);
  detail += fmt("%.2fs", elapsed);
  return {ok && elapsed < 10.0 ? Status::pass : Status::fail, detail};
}

// 2. Reduced configuration against an independently coded greedy attack.
Verdict reduction_equivalence() {
  int mismatches = 0;
  int flips = 0;
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    const Graph g = effectiveness_sbm(seed);
    const TrainConfig tc = TrainConfig::surrogate_defaults();
    AttackConfig c = default_attack(g, seed);
    c.momentum = 0.0;
    c.si_samples = 1;
    c.si_sigma = 0.0;
    c.lambda = 1.0;
    c.num_candidates = 1;
    c.batch_size = 1;
    const auto r = run_atkse(g, c, tc);

    Matrix a = g.adjacency;
    std::set<std::pair<int, int>> used;
    for (int t = 0; t < c.budget.delta; ++t) {
      Graph cur = g;
      cur.adjacency = a;
      TrainConfig run = tc;
      run.seed = seed + static_cast<std::uint64_t>(t);
      const SurrogateParams p = train_surrogate(cur, run);
      const Matrix grad = adjacency_gradient(p, a, g.features, g.labels, g.split.train);
      // Cross-entropy ascent: add where the loss gradient is negative, delete where positive.
      double best = 0.0;
      std::pair<int, int> arg{-1, -1};
      for (int u = 0; u < g.num_nodes(); ++u) {
        for (int v = u + 1; v < g.num_nodes(); ++v) {
          if (used.count({u, v})) continue;
          const double s = a(u, v) == 0.0 ? -grad(u, v) : grad(u, v);
          if (s > best) {
            best = s;
            arg = {u, v};
          }
        }
      }
      ++flips;
      const auto k = static_cast<std::size_t>(t);
      if (arg.first < 0 || k >= r.log.records.size() || r.log.records[k].u != arg.first ||
          r.log.records[k].v != arg.second) {
        ++mismatches;
        break;
      }
      used.insert(arg);
      a(arg.first, arg.second) = a(arg.second, arg.first) = 1.0 - a(arg.first, arg.second);
    }
  }
  return {mismatches == 0 ? Status::pass : Status::fail,
          std::to_string(flips) + " flips over 5 seeds, " + std::to_string(mismatches) + " divergent sequences"};
}

// 3. Right-endpoint Riemann bias on L = A_uv^2.
Verdict riemann_bias() {
  const GradientFn quadratic = [](const Matrix& a) {
    Matrix g = 2.0 * a;
    g.diagonal().setZero();
    return g;
  };
  const Matrix a = Matrix::Zero(3, 3);
  const double coarse = integral_gradient(quadratic, a, 0, 1, 0.2);
  const double fine = integral_gradient(quadratic, a, 0, 1, 0.05);
  const double ratio = ((coarse - 1.0) / 0.2) / ((fine - 1.0) / 0.05);
  const bool ok = std::abs(coarse - 1.2) < 1e-12 && std::abs(fine - 1.05) < 1e-12 && std::abs(ratio - 1.0) <= 0.05;
  return {ok ? Status::pass : Status::fail,
          fmt("lambda 0.2 -> %.12g, lambda 0.05 -> %.12g, error/lambda ratio %.4f", coarse, fine, ratio)};
}

// 4. Budget exactness, no repeated flips, log-identical reruns.
Verdict budget_and_determinism() {
  int runs = 0;
  std::string failure;
  for (const std::string method : {"atkse", "greedy", "random", "dice"}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Graph g = effectiveness_sbm(seed);
      AttackConfig c = default_attack(g, seed);
      if (method == "greedy") {
        c.momentum = 0.0;
        c.si_samples = 1;
        c.si_sigma = 0.0;
        c.lambda = 1.0;
        c.num_candidates = 1;
        c.batch_size = 1;
      }
      auto attack = [&] {
        if (method == "random") {
          Rng rng = make_rng(seed, "baseline");
          return random_attack(g, c.budget, rng);
        }
        if (method == "dice") {
          TrainConfig tc = TrainConfig::surrogate_defaults();
          tc.seed = seed;
          const auto labels = attacker_labels(g, tc);
          Rng rng = make_rng(seed, "baseline");
          return dice_attack(g, c.budget, labels, rng);
        }
        return run_atkse(g, c, TrainConfig::surrogate_defaults());
      };
      const AttackResult first = attack();
      const AttackResult second = attack();
      ++runs;
      std::set<std::pair<int, int>> pairs;
      for (const auto& r : first.log.records) pairs.insert({r.u, r.v});
      const auto delta = static_cast<std::size_t>(c.budget.delta);
      const bool ok = first.completed && l0_distance(g.adjacency, first.perturbed.adjacency) == 2 * c.budget.delta &&
                      first.log.records.size() == delta && pairs.size() == delta &&
                      to_jsonl(first.log) == to_jsonl(second.log) && first.perturbed == second.perturbed;
      if (!ok && failure.empty()) failure = method + " seed " + std::to_string(seed);
    }
  }
  if (!failure.empty()) return {Status::fail, "violated by " + failure};
  return {Status::pass, std::to_string(runs) + " method/seed pairs, each run twice"};
}

struct Effectiveness {
  double clean = 0, random = 0, dice = 0, atkse = 0;
};

// 5. clean > random > atkse with the required margins.
Verdict effectiveness(Effectiveness& acc) {
  const auto t0 = Clock::now();
  const TrainConfig victim = TrainConfig::victim_defaults();
  constexpr int seeds = 5;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    const Graph g = effectiveness_sbm(seed);
    const AttackConfig c = default_attack(g, seed);
    const auto atk = run_atkse(g, c, TrainConfig::surrogate_defaults());
    if (!atk.completed) return {Status::fail, "attack aborted: " + atk.abort_reason};
    Rng rr = make_rng(seed, "baseline");
    const auto rnd = random_attack(g, c.budget, rr);
    TrainConfig label_config = TrainConfig::surrogate_defaults();
    label_config.seed = seed;
    const auto labels = attacker_labels(g, label_config);
    Rng rd = make_rng(seed, "baseline");
    const auto dice = dice_attack(g, c.budget, labels, rd);

    const auto ra = run_trials(g, atk.perturbed, victim, 10, 0);
    const auto rr2 = run_trials(g, rnd.perturbed, victim, 10, 0);
    const auto rd2 = run_trials(g, dice.perturbed, victim, 10, 0);
    acc.clean += ra.clean.mean / seeds;
    acc.atkse += ra.attacked.mean / seeds;
    acc.random += rr2.attacked.mean / seeds;
    acc.dice += rd2.attacked.mean / seeds;
  }
  const double elapsed = seconds_since(t0);
  const double drop_atk = 100.0 * (acc.clean - acc.atkse);
  const double drop_rnd = 100.0 * (acc.clean - acc.random);
  const double drop_dice = 100.0 * (acc.clean - acc.dice);
  const bool ok = acc.clean > acc.random && acc.random > acc.atkse && drop_atk - drop_rnd >= 2.0 &&
                  drop_atk - drop_dice >= 0.0 && elapsed < 600.0;
  return {ok ? Status::pass : Status::fail,
          fmt("clean %.2f%%, random %.2f%%, dice %.2f%%, atkse %.2f%%", 100 * acc.clean, 100 * acc.random,
              100 * acc.dice, 100 * acc.atkse) +
              fmt(" (drops %.2f / %.2f / %.2f pts, %.0fs)", drop_rnd, drop_dice, drop_atk, elapsed)};
}

// 6. Neither ablation is materially stronger than the full method.
Verdict ablations() {
  const TrainConfig victim = TrainConfig::victim_defaults();
  constexpr int seeds = 10;
  std::vector<double> full, no_momentum, no_si;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    const Graph g = effectiveness_sbm(seed);
    const AttackConfig c = default_attack(g, seed);
    AttackConfig m = c;
    m.momentum = 0.0;
    AttackConfig s = c;
    s.si_samples = 1;
    s.si_sigma = 0.0;
    auto attacked = [&](const AttackConfig& cfg) {
      const auto r = run_atkse(g, cfg, TrainConfig::surrogate_defaults());
      return 100.0 * run_trials(g, r.perturbed, victim, 10, 0).attacked.mean;
    };
    full.push_back(attacked(c));
    no_momentum.push_back(attacked(m));
    no_si.push_back(attacked(s));
  }
  // Paired difference (ablation - full) with its standard error over seeds.
  auto paired = [&](const std::vector<double>& ablation) {
    std::vector<double> d;
    for (std::size_t i = 0; i < full.size(); ++i) d.push_back(ablation[i] - full[i]);
    const auto s = summarize(d);
    return std::pair(s.mean, s.std / std::sqrt(static_cast<double>(d.size())));
  };
  const auto [dm, sem] = paired(no_momentum);
  const auto [ds, ses] = paired(no_si);
  const double f = summarize(full).mean;
  const bool ok = dm >= -0.5 && ds >= -0.5;
  return {ok ? Status::pass : Status::fail,
          fmt("attacked accuracy full %.2f%%, no momentum %.2f%%, no semantic invariance %.2f%%", f,
              summarize(no_momentum).mean, summarize(no_si).mean) +
              fmt("; paired ablation-full %+.2f (se %.2f) and %+.2f (se %.2f) pts", dm, sem, ds, ses)};
}

// 7. Real citation bundle, only when one is supplied.
Verdict cora_reproduction() {
  const char* path = std::getenv("ATKSE_CORA_BUNDLE");
  if (path == nullptr || !std::filesystem::exists(path)) {
    return {Status::skip, "set ATKSE_CORA_BUNDLE to a 2708-node, 7-class bundle to run"};
  }
  const Graph g = load_graph_bundle(path);
  if (g.num_nodes() != 2708 || g.num_classes != 7) return {Status::skip, "bundle is not Cora-shaped"};
  const AttackConfig c = default_attack(g, 0);
  const auto atk = run_atkse(g, c, TrainConfig::surrogate_defaults());
  const auto report = run_trials(g, atk.perturbed, TrainConfig::victim_defaults(), 10, 0);
  const double clean = 100 * report.clean.mean;
  const double attacked = 100 * report.attacked.mean;
  const bool ok = std::abs(clean - 81.7) <= 2.0 && std::abs(attacked - 73.7) <= 2.5;
  return {ok ? Status::pass : Status::fail, fmt("clean %.2f%%, attacked %.2f%%", clean, attacked)};
}

// 8. Gradient evaluations per iteration = n + ceil(C'/bs) / lambda.
Verdict work_bound() {
  int iterations = 0;
  int violations = 0;
  std::vector<AttackConfig> configs;
  const Graph g = effectiveness_sbm(3);
  configs.push_back(default_attack(g, 3));
  AttackConfig small = default_attack(g, 3);
  small.lambda = 0.25;
  small.num_candidates = 10;
  small.batch_size = 3;
  small.si_samples = 2;
  configs.push_back(small);
  for (const auto& c : configs) {
    const auto r = run_atkse(g, c, TrainConfig::surrogate_defaults());
    for (const auto& s : r.stats) {
      ++iterations;
      const int batches = (s.num_candidates + c.batch_size - 1) / c.batch_size;
      const auto expected = static_cast<std::uint64_t>(c.si_samples + batches * c.sampling_steps());
      if (s.gradient_evaluations != expected) ++violations;
    }
  }
  return {violations == 0 && iterations > 0 ? Status::pass : Status::fail,
          std::to_string(iterations) + " iterations checked, " + std::to_string(violations) + " mismatches"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> check;
  };
  Effectiveness eff;
  const Criterion criteria[] = {
      {"1 gradient-oracle agreement", gradient_oracle},
      {"2 reduction equivalence", reduction_equivalence},
      {"3 riemann-sum bias", riemann_bias},
      {"4 budget and determinism", budget_and_determinism},
      {"5 attack-effectiveness ordering", [&] { return effectiveness(eff); }},
      {"6 ablation direction", ablations},
      {"7 cora reproduction", cora_reproduction},
      {"8 work bound", work_bound},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {Status::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = v.status == Status::pass ? "PASS" : v.status == Status::fail ? "FAIL" : "SKIP";
    if (v.status == Status::fail) ++failures;
    std::printf("%s  criterion %s: %s\n", tag, c.name, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
