// SPDX-License-Identifier: Apache-2.0
#include "atkse/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "atkse/errors.hpp"
#include "atkse/rng.hpp"

namespace atkse {

Graph generate_sbm(const SbmConfig& config) {
  const int n = config.num_nodes;
  const int c = config.num_classes;
  if (n < 1 || c < 1) throw InvalidArgument("num_nodes and num_classes must be positive");
  if (n % c != 0) {
    throw InvalidArgument("num_nodes (" + std::to_string(n) + ") not divisible by num_classes (" +
                          std::to_string(c) + ")");
  }
  if (!(config.p_in >= 0.0 && config.p_in <= 1.0 && config.p_out >= 0.0 && config.p_out <= 1.0)) {
    throw InvalidArgument("edge probabilities must lie in [0,1]");
  }
  if (!(config.p_in > config.p_out)) throw InvalidArgument("p_in must exceed p_out");
  if (config.num_features < 0) throw InvalidArgument("num_features must be nonnegative");
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must lie in (0,1)");
  }
  const int block = n / c;
  if (block < 2) throw InvalidArgument("each class needs at least two nodes for a train/test split");

  Graph g;
  g.num_classes = c;
  g.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g.labels[static_cast<std::size_t>(i)] = i / block;

  Rng edge_rng = make_rng(config.seed, "graph-gen/edges");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  g.adjacency = Matrix::Zero(n, n);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const double p = (u / block == v / block) ? config.p_in : config.p_out;
      if (unit(edge_rng) < p) {
        g.adjacency(u, v) = 1.0;
        g.adjacency(v, u) = 1.0;
      }
    }
  }

  Rng feature_rng = make_rng(config.seed, "graph-gen/features");
  std::normal_distribution<double> normal(0.0, 1.0);
  const int f = config.num_features;
  const int coords_per_class = f / c;
  g.features.resize(n, f);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < f; ++j) g.features(i, j) = normal(feature_rng);
    const int k = g.labels[static_cast<std::size_t>(i)];
    for (int j = k * coords_per_class; j < (k + 1) * coords_per_class; ++j) {
      g.features(i, j) += config.feature_shift;
    }
  }

  Rng split_rng = make_rng(config.seed, "graph-gen/split");
  const int train_per_class =
      std::clamp(static_cast<int>(std::lround(config.train_fraction * block)), 1, block - 1);
  for (int k = 0; k < c; ++k) {
    std::vector<NodeId> members(static_cast<std::size_t>(block));
    std::iota(members.begin(), members.end(), k * block);
    std::shuffle(members.begin(), members.end(), split_rng);
    g.split.train.insert(g.split.train.end(), members.begin(), members.begin() + train_per_class);
    g.split.test.insert(g.split.test.end(), members.begin() + train_per_class, members.end());
  }
  std::sort(g.split.train.begin(), g.split.train.end());
  std::sort(g.split.test.begin(), g.split.test.end());
  return g;
}

}  // namespace atkse
