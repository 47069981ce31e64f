// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "atkse/graph.hpp"
#include "atkse/perturbation.hpp"
#include "atkse/rng.hpp"
#include "atkse/surrogate.hpp"

namespace atkse {

/// Hyperparameters of the structure attack. Defaults: sampling interval 0.2,
/// 64 candidates, batches of 16, momentum 0.8, 5 noise samples with standard
/// deviation 5e-4.
struct AttackConfig {
  Budget budget;
  double lambda = 0.2;
  int num_candidates = 64;
  int batch_size = 16;
  double momentum = 0.8;
  int si_samples = 5;
  double si_sigma = 5e-4;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument (or InfeasibleConfig for the budget) on violation.
  void validate() const;
  /// 1 / lambda.
  [[nodiscard]] int sampling_steps() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Gradient the attacker ascends: the derivative of the mean cross-entropy on
/// `node_set` with respect to every adjacency entry, i.e. -adjacency_gradient.
/// A positive entry on an absent edge means adding it increases the loss.
[[nodiscard]] Matrix structural_gradient(const SurrogateParams& params, const Matrix& adjacency,
                                         const Matrix& features, std::span<const int> labels,
                                         std::span<const NodeId> node_set);

/// Number of Riemann steps 1/lambda; throws unless 1/lambda is a positive integer.
[[nodiscard]] int sampling_steps(double lambda);

/// Momentum accumulator of structural gradients across attack iterations.
struct GradientState {
  Matrix current;   // accumulated gradient at `iteration`
  Matrix previous;  // accumulated gradient at `iteration - 1` (ignored at 0)
  int iteration = 0;

  /// Moves current into previous and increments the iteration.
  void advance();
};

/// current = fresh + p * previous, or current = fresh at iteration 0.
[[nodiscard]] GradientState momentum_update(const GradientState& state, const Matrix& fresh, double p);

struct Candidate {
  NodeId u = 0;
  NodeId v = 0;
  FlipAction direction = FlipAction::add;
  double saliency = 0.0;

  bool operator==(const Candidate&) const = default;
};
using CandidateSet = std::vector<Candidate>;

/// Saliency (1 - 2A) * grad where positive, 0 elsewhere; diagonal and every
/// pair in `excluded` (both orientations) forced to 0.
[[nodiscard]] Matrix filter_candidates(const Matrix& grad, const Matrix& adjacency,
                                       std::span<const std::pair<NodeId, NodeId>> excluded = {});

/// The C largest strictly positive upper-triangular saliencies, sorted by
/// saliency descending with ties broken by (u,v) ascending. Directions come
/// from the current adjacency. Throws DegenerateGradient if none is positive.
[[nodiscard]] CandidateSet select_top_c(const Matrix& saliency, const Matrix& adjacency, int num_candidates);

/// Maps an adjacency matrix to its (symmetrized) structural gradient.
using GradientFn = std::function<Matrix(const Matrix&)>;

/// Right-endpoint Riemann sum lambda * sum_{s=1}^{1/lambda} grad(A_uv = s*lambda)[u][v]
/// with both symmetric entries set to the transitional weight.
[[nodiscard]] double integral_gradient(const GradientFn& gradient, const Matrix& adjacency, NodeId u, NodeId v,
                                       double lambda);

/// Same as above with the model's structural gradient on `graph` (train nodes).
[[nodiscard]] double integral_gradient(const SurrogateParams& params, const Graph& graph, NodeId u, NodeId v,
                                       double lambda);

/// Integral gradients of a whole batch, moving every batch edge to the
/// transitional weight simultaneously: 1/lambda gradient evaluations in total.
[[nodiscard]] std::vector<double> batch_integral_gradients(const GradientFn& gradient, const Matrix& adjacency,
                                                           std::span<const Candidate> batch, double lambda);
[[nodiscard]] std::vector<double> batch_integral_gradients(const SurrogateParams& params, const Graph& graph,
                                                           std::span<const Candidate> batch, double lambda);

/// Candidate maximizing (1 - 2A_uv) * g_int; ties go to the smallest (u,v).
[[nodiscard]] Candidate select_perturbation(std::span<const Candidate> candidates, std::span<const double> g_ints,
                                            const Matrix& adjacency);

/// Mean over n draws of the structural gradient at features X + N(0, sigma^2),
/// with independent noise on every feature entry.
[[nodiscard]] Matrix semantic_invariant_gradient(const SurrogateParams& params, const Graph& graph, double sigma,
                                                 int samples, Rng& rng);

struct EnsembleGradient {
  Matrix mean;
  std::vector<Matrix> runs;
};

/// Mean structural gradient over k surrogates retrained with seeds seed..seed+k-1.
[[nodiscard]] EnsembleGradient retrain_ensemble_gradient(const Graph& graph, const TrainConfig& config, int k);

struct IterationStats {
  int iteration = 0;
  int num_candidates = 0;
  std::uint64_t gradient_evaluations = 0;
};

struct AttackResult {
  Graph perturbed;
  PerturbationLog log;
  std::vector<IterationStats> stats;
  bool completed = true;
  std::string abort_reason;
};

/// Runs budget.delta iterations of: retrain surrogate (seed + t), noise-averaged
/// gradient, momentum, sign filter, top-C, batched integral gradients, pick
/// and flip. Stops early with completed = false and a partial log if the
/// gradient degenerates.
[[nodiscard]] AttackResult run_atkse(const Graph& graph, const AttackConfig& config, const TrainConfig& train_config);

}  // namespace atkse
