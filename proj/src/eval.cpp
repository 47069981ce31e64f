// SPDX-License-Identifier: Apache-2.0
#include "atkse/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "atkse/errors.hpp"

namespace atkse {

namespace {

std::string percent(const AccuracyStats& s) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f±%.1f", 100.0 * s.mean, 100.0 * s.std);
  return buf;
}

}  // namespace

AccuracyStats summarize(std::span<const double> values) {
  AccuracyStats out;
  if (values.empty()) return out;
  // Sorted summation makes the result independent of trial order.
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  out.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  if (sorted.size() > 1) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["budget_rate"] = budget_rate;
  j["trials"] = trials;
  j["clean_acc"] = {{"mean", clean.mean}, {"std", clean.std}};
  j["attacked_acc"] = {{"mean", attacked.mean}, {"std", attacked.std}};
  j["clean_per_trial"] = clean_per_trial;
  j["attacked_per_trial"] = attacked_per_trial;
  return j;
}

std::string EvalReport::to_table() const {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%-12s %8s %6s %14s %14s %8s\n", "method", "rate", "trials", "clean",
                "attacked", "delta");
  out += buf;
  // The ± sign is two bytes in UTF-8; pad by hand so columns stay aligned.
  auto cell = [](const std::string& s) {
    std::string c = s;
    while (c.size() < 15) c.insert(c.begin(), ' ');
    return c;
  };
  std::snprintf(buf, sizeof(buf), "%-12s %7.1f%% %6d", method.c_str(), 100.0 * budget_rate, trials);
  out += buf;
  out += ' ' + cell(percent(clean)) + ' ' + cell(percent(attacked));
  std::snprintf(buf, sizeof(buf), " %+8.1f\n", 100.0 * (attacked.mean - clean.mean));
  out += buf;
  return out;
}

SurrogateParams train_victim(const Graph& graph, TrainConfig config, std::uint64_t seed) {
  config.seed = seed;
  return train_surrogate(graph, config);
}

double evaluate_accuracy(const SurrogateParams& params, const Graph& graph) {
  if (graph.split.test.empty()) throw InvalidArgument("test split is empty");
  const std::vector<int> predicted = predict(params, graph.adjacency, graph.features);
  std::size_t correct = 0;
  for (NodeId i : graph.split.test) {
    const auto k = static_cast<std::size_t>(i);
    if (predicted[k] == graph.labels[k]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(graph.split.test.size());
}

EvalReport run_trials(const Graph& clean, const Graph& perturbed, const TrainConfig& victim_config, int trials,
                      std::uint64_t seed, const std::string& method, double budget_rate, int threads) {
  if (trials < 2) throw InvalidArgument("at least two trials are needed for a standard deviation");
  if (clean.num_nodes() != perturbed.num_nodes()) throw InfeasibleConfig("clean and perturbed node counts differ");
  EvalReport report;
  report.method = method;
  report.budget_rate = budget_rate;
  report.trials = trials;
  report.clean_per_trial.assign(static_cast<std::size_t>(trials), 0.0);
  report.attacked_per_trial.assign(static_cast<std::size_t>(trials), 0.0);

  auto run_one = [&](int t) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
    const auto k = static_cast<std::size_t>(t);
    report.clean_per_trial[k] = evaluate_accuracy(train_victim(clean, victim_config, s), clean);
    report.attacked_per_trial[k] = evaluate_accuracy(train_victim(perturbed, victim_config, s), perturbed);
  };

  const int workers = std::clamp(threads, 1, trials);
  if (workers == 1) {
    for (int t = 0; t < trials; ++t) run_one(t);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int t = next++; t < trials; t = next++) {
          try {
            run_one(t);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }
  report.clean = summarize(report.clean_per_trial);
  report.attacked = summarize(report.attacked_per_trial);
  return report;
}

}  // namespace atkse
