// SPDX-License-Identifier: Apache-2.0
#include "atkse/attack.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "atkse/errors.hpp"

namespace atkse {

namespace {

bool before(const Candidate& a, const Candidate& b) {
  if (a.saliency != b.saliency) return a.saliency > b.saliency;
  if (a.u != b.u) return a.u < b.u;
  return a.v < b.v;
}

GradientFn model_gradient(const SurrogateParams& params, const Graph& graph) {
  return [&params, &graph](const Matrix& adjacency) {
    return structural_gradient(params, adjacency, graph.features, graph.labels, graph.split.train);
  };
}

void check_candidate_pair(const Matrix& adjacency, NodeId u, NodeId v) {
  const auto n = static_cast<NodeId>(adjacency.rows());
  if (u < 0 || v < 0 || u >= n || v >= n) throw InvalidArgument("candidate out of range");
  if (u == v) throw InvalidArgument("candidate on the diagonal");
}

}  // namespace

Matrix structural_gradient(const SurrogateParams& params, const Matrix& adjacency, const Matrix& features,
                           std::span<const int> labels, std::span<const NodeId> node_set) {
  Matrix grad = adjacency_gradient(params, adjacency, features, labels, node_set);
  grad = -grad;
  return grad;
}

int sampling_steps(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in (0,1]");
  const double inv = 1.0 / lambda;
  const double steps = std::round(inv);
  if (std::abs(inv - steps) > 1e-9 * steps) {
    throw InvalidArgument("1/lambda must be an integer, got 1/" + std::to_string(lambda));
  }
  return static_cast<int>(steps);
}

void AttackConfig::validate() const {
  if (budget.delta < 1) throw InfeasibleConfig("attack budget must allow at least one flip");
  (void)atkse::sampling_steps(lambda);
  if (batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
  if (num_candidates < batch_size) throw InvalidArgument("num_candidates must be >= batch_size");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("momentum must lie in [0,1)");
  if (si_samples < 1) throw InvalidArgument("si_samples must be at least 1");
  if (!(si_sigma >= 0.0)) throw InvalidArgument("si_sigma must be nonnegative");
}

int AttackConfig::sampling_steps() const { return atkse::sampling_steps(lambda); }

nlohmann::json AttackConfig::to_json() const {
  nlohmann::ordered_json j;
  j["budget_delta"] = budget.delta;
  j["budget_rate"] = budget.rate;
  j["lambda"] = lambda;
  j["candidates"] = num_candidates;
  j["batch"] = batch_size;
  j["momentum"] = momentum;
  j["si_samples"] = si_samples;
  j["si_sigma"] = si_sigma;
  j["seed"] = seed;
  return j;
}

void GradientState::advance() {
  previous = std::move(current);
  current = Matrix();
  ++iteration;
}

GradientState momentum_update(const GradientState& state, const Matrix& fresh, double p) {
  GradientState next;
  next.iteration = state.iteration;
  next.previous = state.previous;
  if (state.iteration == 0 || p == 0.0) {
    next.current = fresh;
    return next;
  }
  if (state.previous.rows() != fresh.rows() || state.previous.cols() != fresh.cols()) {
    throw InvalidArgument("momentum_update: dimension mismatch");
  }
  next.current = fresh + p * state.previous;
  return next;
}

Matrix filter_candidates(const Matrix& grad, const Matrix& adjacency,
                         std::span<const std::pair<NodeId, NodeId>> excluded) {
  if (grad.rows() != adjacency.rows() || grad.cols() != adjacency.cols()) {
    throw InvalidArgument("filter_candidates: shape mismatch");
  }
  Matrix saliency = ((1.0 - 2.0 * adjacency.array()) * grad.array()).cwiseMax(0.0).matrix();
  saliency.diagonal().setZero();
  for (const auto& [u, v] : excluded) {
    saliency(u, v) = 0.0;
    saliency(v, u) = 0.0;
  }
  return saliency;
}

CandidateSet select_top_c(const Matrix& saliency, const Matrix& adjacency, int num_candidates) {
  if (num_candidates < 1) throw InvalidArgument("num_candidates must be at least 1");
  CandidateSet all;
  const auto n = static_cast<NodeId>(saliency.rows());
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u = 0; u < v; ++u) {
      const double s = saliency(u, v);
      if (s > 0.0) {
        all.push_back({u, v, adjacency(u, v) == 0.0 ? FlipAction::add : FlipAction::remove, s});
      }
    }
  }
  if (all.empty()) throw DegenerateGradient("no edge has positive saliency");
  const auto keep = std::min<std::size_t>(all.size(), static_cast<std::size_t>(num_candidates));
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), before);
  all.resize(keep);
  return all;
}

double integral_gradient(const GradientFn& gradient, const Matrix& adjacency, NodeId u, NodeId v, double lambda) {
  const Candidate single{std::min(u, v), std::max(u, v), FlipAction::add, 1.0};
  return batch_integral_gradients(gradient, adjacency, std::span(&single, 1), lambda).front();
}

double integral_gradient(const SurrogateParams& params, const Graph& graph, NodeId u, NodeId v, double lambda) {
  return integral_gradient(model_gradient(params, graph), graph.adjacency, u, v, lambda);
}

std::vector<double> batch_integral_gradients(const GradientFn& gradient, const Matrix& adjacency,
                                             std::span<const Candidate> batch, double lambda) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  const int steps = sampling_steps(lambda);
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& c : batch) {
    check_candidate_pair(adjacency, c.u, c.v);
    if (!seen.insert({std::min(c.u, c.v), std::max(c.u, c.v)}).second) {
      throw InvalidArgument("duplicate candidate (" + std::to_string(c.u) + "," + std::to_string(c.v) + ") in batch");
    }
  }
  std::vector<double> sums(batch.size(), 0.0);
  Matrix transitional = adjacency;
  for (int s = 1; s <= steps; ++s) {
    const double weight = static_cast<double>(s) / steps;
    for (const auto& c : batch) {
      transitional(c.u, c.v) = weight;
      transitional(c.v, c.u) = weight;
    }
    const Matrix grad = gradient(transitional);
    for (std::size_t k = 0; k < batch.size(); ++k) sums[k] += grad(batch[k].u, batch[k].v);
  }
  for (double& g : sums) g /= steps;
  return sums;
}

std::vector<double> batch_integral_gradients(const SurrogateParams& params, const Graph& graph,
                                             std::span<const Candidate> batch, double lambda) {
  return batch_integral_gradients(model_gradient(params, graph), graph.adjacency, batch, lambda);
}

Candidate select_perturbation(std::span<const Candidate> candidates, std::span<const double> g_ints,
                              const Matrix& adjacency) {
  if (candidates.empty()) throw InvalidArgument("no candidates to choose from");
  if (candidates.size() != g_ints.size()) throw InvalidArgument("g_ints not aligned with candidates");
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto& c = candidates[k];
    const double score = (1.0 - 2.0 * adjacency(c.u, c.v)) * g_ints[k];
    const auto& b = candidates[best];
    if (k == 0 || score > best_score ||
        (score == best_score && std::pair(c.u, c.v) < std::pair(b.u, b.v))) {
      best = k;
      best_score = score;
    }
  }
  return candidates[best];
}

Matrix semantic_invariant_gradient(const SurrogateParams& params, const Graph& graph, double sigma, int samples,
                                   Rng& rng) {
  if (samples < 1) throw InvalidArgument("semantic invariance needs at least one sample");
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be nonnegative");
  Matrix sum;
  std::normal_distribution<double> noise(0.0, sigma);
  for (int i = 0; i < samples; ++i) {
    Matrix grad;
    if (sigma == 0.0) {
      grad = structural_gradient(params, graph.adjacency, graph.features, graph.labels, graph.split.train);
    } else {
      Matrix noisy = graph.features;
      for (Eigen::Index j = 0; j < noisy.cols(); ++j) {
        for (Eigen::Index r = 0; r < noisy.rows(); ++r) noisy(r, j) += noise(rng);
      }
      grad = structural_gradient(params, graph.adjacency, noisy, graph.labels, graph.split.train);
    }
    if (i == 0) {
      sum = std::move(grad);
    } else {
      sum += grad;
    }
  }
  if (samples > 1) sum /= static_cast<double>(samples);
  return sum;
}

EnsembleGradient retrain_ensemble_gradient(const Graph& graph, const TrainConfig& config, int k) {
  if (k < 1) throw InvalidArgument("ensemble size must be at least 1");
  EnsembleGradient out;
  for (int i = 0; i < k; ++i) {
    TrainConfig run = config;
    run.seed = config.seed + static_cast<std::uint64_t>(i);
    const SurrogateParams params = train_surrogate(graph, run);
    out.runs.push_back(structural_gradient(params, graph.adjacency, graph.features, graph.labels, graph.split.train));
  }
  out.mean = out.runs.front();
  for (int i = 1; i < k; ++i) out.mean += out.runs[static_cast<std::size_t>(i)];
  if (k > 1) out.mean /= static_cast<double>(k);
  return out;
}

AttackResult run_atkse(const Graph& graph, const AttackConfig& config, const TrainConfig& train_config) {
  graph.validate();
  config.validate();

  AttackResult result;
  result.perturbed = graph;
  result.log.method = "atkse";
  result.log.config = config.to_json();
  Graph& current = result.perturbed;

  std::vector<std::pair<NodeId, NodeId>> flipped;
  GradientState state;
  for (int t = 0; t < config.budget.delta; ++t) {
    const std::uint64_t evaluations_before = adjacency_gradient_evaluations();

    TrainConfig tc = train_config;
    tc.seed = config.seed + static_cast<std::uint64_t>(t);
    const SurrogateParams params = train_surrogate(current, tc);

    Rng noise_rng = make_rng(config.seed, "noise", static_cast<std::uint64_t>(t));
    const Matrix fresh = semantic_invariant_gradient(params, current, config.si_sigma, config.si_samples, noise_rng);
    state = momentum_update(state, fresh, config.momentum);

    const Matrix saliency = filter_candidates(state.current, current.adjacency, flipped);
    CandidateSet candidates;
    try {
      candidates = select_top_c(saliency, current.adjacency, config.num_candidates);
    } catch (const DegenerateGradient& e) {
      result.completed = false;
      result.abort_reason = "iteration " + std::to_string(t) + ": " + e.what();
      return result;
    }

    std::vector<double> g_ints;
    g_ints.reserve(candidates.size());
    for (std::size_t start = 0; start < candidates.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t len = std::min(candidates.size() - start, static_cast<std::size_t>(config.batch_size));
      const auto batch = std::span(candidates).subspan(start, len);
      const auto values = batch_integral_gradients(params, current, batch, config.lambda);
      g_ints.insert(g_ints.end(), values.begin(), values.end());
    }

    const Candidate chosen = select_perturbation(candidates, g_ints, current.adjacency);
    const auto idx = static_cast<std::size_t>(
        std::find(candidates.begin(), candidates.end(), chosen) - candidates.begin());
    flip_edge_inplace(current.adjacency, chosen.u, chosen.v);
    flipped.emplace_back(chosen.u, chosen.v);
    result.log.records.push_back({t, chosen.u, chosen.v, chosen.direction, g_ints[idx], chosen.saliency});
    result.stats.push_back({t, static_cast<int>(candidates.size()),
                            adjacency_gradient_evaluations() - evaluations_before});
    state.advance();
  }
  return result;
}

}  // namespace atkse
