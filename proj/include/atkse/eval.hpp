// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "atkse/graph.hpp"
#include "atkse/surrogate.hpp"

namespace atkse {

struct AccuracyStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
};

[[nodiscard]] AccuracyStats summarize(std::span<const double> values);

struct EvalReport {
  std::string method;
  double budget_rate = 0.0;
  int trials = 0;
  AccuracyStats clean;
  AccuracyStats attacked;
  std::vector<double> clean_per_trial;
  std::vector<double> attacked_per_trial;

  [[nodiscard]] nlohmann::json to_json() const;
  /// Aligned plain-text table in percent, "mean±std" per column.
  [[nodiscard]] std::string to_table() const;
};

/// Trains the victim GCN with `config` and the given seed.
[[nodiscard]] SurrogateParams train_victim(const Graph& graph, TrainConfig config, std::uint64_t seed);

/// Fraction of test nodes whose argmax prediction (lowest class on ties)
/// matches the label. Train labels never enter the score.
[[nodiscard]] double evaluate_accuracy(const SurrogateParams& params, const Graph& graph);

/// Poisoning evaluation: trains a victim on each graph with seeds
/// seed..seed+trials-1 and scores each on its own graph's test split.
/// Trials may run on up to `threads` workers; results do not depend on it.
[[nodiscard]] EvalReport run_trials(const Graph& clean, const Graph& perturbed, const TrainConfig& victim_config,
                                    int trials, std::uint64_t seed, const std::string& method = "unknown",
                                    double budget_rate = 0.0, int threads = 1);

}  // namespace atkse
