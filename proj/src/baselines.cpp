// SPDX-License-Identifier: Apache-2.0
#include "atkse/baselines.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <utility>

#include "atkse/errors.hpp"

namespace atkse {

namespace {

using Pair = std::pair<NodeId, NodeId>;

AttackResult start(const Graph& graph, const Budget& budget, std::string_view method) {
  graph.validate();
  if (budget.delta < 1) throw InfeasibleConfig("attack budget must allow at least one flip");
  AttackResult result;
  result.perturbed = graph;
  result.log.method = std::string(method);
  nlohmann::ordered_json config;
  config["budget_delta"] = budget.delta;
  config["budget_rate"] = budget.rate;
  result.log.config = config;
  return result;
}

void apply(AttackResult& result, std::set<Pair>& flipped, int iteration, NodeId u, NodeId v) {
  const FlipAction action = result.perturbed.adjacency(u, v) == 0.0 ? FlipAction::add : FlipAction::remove;
  flip_edge_inplace(result.perturbed.adjacency, u, v);
  flipped.insert({u, v});
  result.log.records.push_back({iteration, u, v, action, 0.0, 0.0});
}

}  // namespace

std::string_view to_string(BaselineKind kind) { return kind == BaselineKind::random ? "random" : "dice"; }

AttackResult random_attack(const Graph& graph, const Budget& budget, Rng& rng) {
  AttackResult result = start(graph, budget, "random");
  const auto n = static_cast<std::int64_t>(graph.num_nodes());
  const std::int64_t pairs = n * (n - 1) / 2;
  if (budget.delta > pairs) {
    throw InfeasibleConfig("graph with " + std::to_string(n) + " nodes cannot host " +
                           std::to_string(budget.delta) + " distinct flips");
  }
  std::set<Pair> flipped;
  std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
  for (int t = 0; t < budget.delta; ++t) {
    NodeId u = 0;
    NodeId v = 0;
    if (2 * static_cast<std::int64_t>(flipped.size()) < pairs) {
      // Rejection sampling of an ordered pair, then canonicalized: uniform over unordered pairs.
      do {
        u = node(rng);
        v = node(rng);
        if (u > v) std::swap(u, v);
      } while (u == v || flipped.count({u, v}));
    } else {
      std::vector<Pair> remaining;
      for (NodeId a = 0; a < n; ++a) {
        for (NodeId b = a + 1; b < n; ++b) {
          if (!flipped.count({a, b})) remaining.emplace_back(a, b);
        }
      }
      std::uniform_int_distribution<std::size_t> pick(0, remaining.size() - 1);
      std::tie(u, v) = remaining[pick(rng)];
    }
    apply(result, flipped, t, u, v);
  }
  return result;
}

std::vector<int> attacker_labels(const Graph& graph, const TrainConfig& config) {
  const SurrogateParams params = train_surrogate(graph, config);
  std::vector<int> labels = predict(params, graph.adjacency, graph.features);
  for (NodeId i : graph.split.train) labels[static_cast<std::size_t>(i)] = graph.labels[static_cast<std::size_t>(i)];
  return labels;
}

AttackResult dice_attack(const Graph& graph, const Budget& budget, std::span<const int> labels, Rng& rng) {
  AttackResult result = start(graph, budget, "dice");
  const NodeId n = graph.num_nodes();
  if (static_cast<NodeId>(labels.size()) != n) throw InvalidArgument("dice: one label per node required");
  std::set<Pair> flipped;
  std::bernoulli_distribution coin(0.5);
  for (int t = 0; t < budget.delta; ++t) {
    std::vector<Pair> deletions;
    std::vector<Pair> additions;
    const Matrix& a = result.perturbed.adjacency;
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (flipped.count({u, v})) continue;
        const bool same = labels[static_cast<std::size_t>(u)] == labels[static_cast<std::size_t>(v)];
        if (a(u, v) != 0.0 && same) deletions.emplace_back(u, v);
        if (a(u, v) == 0.0 && !same) additions.emplace_back(u, v);
      }
    }
    if (deletions.empty() && additions.empty()) {
      throw InfeasibleConfig("dice: no same-class edge to delete and no cross-class pair to add");
    }
    const bool want_delete = coin(rng);
    const auto& pool = (want_delete && !deletions.empty()) || additions.empty() ? deletions : additions;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const auto [u, v] = pool[pick(rng)];
    apply(result, flipped, t, u, v);
  }
  return result;
}

}  // namespace atkse
