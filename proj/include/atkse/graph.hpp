// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace atkse {

using Matrix = Eigen::MatrixXd;
using NodeId = int;

/// Train/test partition of the node set. No validation split exists.
struct Split {
  std::vector<NodeId> train;
  std::vector<NodeId> test;
};

/// Undirected attributed graph with a dense symmetric adjacency matrix.
///
/// Invariants (checked by validate()): adjacency is square and symmetric with
/// a zero diagonal and weights in [0,1]; features has one row per node; every
/// label is in [0, num_classes); train and test are disjoint and cover all
/// nodes.
struct Graph {
  Matrix adjacency;
  Matrix features;
  std::vector<int> labels;
  int num_classes = 0;
  Split split;

  [[nodiscard]] int num_nodes() const { return static_cast<int>(adjacency.rows()); }
  [[nodiscard]] int num_features() const { return static_cast<int>(features.cols()); }

  /// Throws InvalidArgument naming the first broken invariant.
  void validate() const;

  bool operator==(const Graph& other) const;
};

/// Number of unordered node pairs {u,v} with a nonzero adjacency weight.
[[nodiscard]] std::int64_t count_edges(const Matrix& adjacency);

/// Number of entries where the two matrices differ (the L0 distance).
[[nodiscard]] std::int64_t l0_distance(const Matrix& a, const Matrix& b);

/// D^{-1/2} (A + I) D^{-1/2} where D is the row-sum degree matrix of A + I.
///
/// Self-loops are added here and never stored in A. Fractional weights are
/// accepted. Throws InvalidArgument if A is not square or a degree is not
/// positive.
[[nodiscard]] Matrix normalize_adjacency(const Matrix& adjacency);

/// Toggles A[u][v] and A[v][u] between 0 and 1 in place.
void flip_edge_inplace(Matrix& adjacency, NodeId u, NodeId v);

/// Returns a copy of A with the (u,v) edge flipped on both symmetric entries.
[[nodiscard]] Matrix flip_edge(const Matrix& adjacency, NodeId u, NodeId v);

/// Attack budget: the number of undirected edge flips allowed.
struct Budget {
  int delta = 0;
  double rate = 0.0;
};

/// delta = floor(rate * |E|). Throws InfeasibleConfig when the graph has no
/// edges, rate is outside (0,1], or the budget rounds to zero.
[[nodiscard]] Budget edge_budget(const Graph& graph, double rate);

/// Fraction of edges whose endpoints share a label. Returns 0 for an empty graph.
[[nodiscard]] double homophily_ratio(const Matrix& adjacency, const std::vector<int>& labels);

}  // namespace atkse
