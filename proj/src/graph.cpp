// SPDX-License-Identifier: Apache-2.0
#include "atkse/graph.hpp"

#include <cmath>
#include <string>

#include "atkse/errors.hpp"

namespace atkse {

namespace {

void check_pair(const Matrix& adjacency, NodeId u, NodeId v) {
  const int n = static_cast<int>(adjacency.rows());
  if (u < 0 || v < 0 || u >= n || v >= n) {
    throw InvalidArgument("node pair (" + std::to_string(u) + "," + std::to_string(v) +
                          ") out of range for " + std::to_string(n) + " nodes");
  }
  if (u == v) {
    throw InvalidArgument("self-loop flip (" + std::to_string(u) + "," + std::to_string(v) +
                          ") rejected");
  }
}

}  // namespace

void Graph::validate() const {
  const Eigen::Index n = adjacency.rows();
  if (adjacency.cols() != n) throw InvalidArgument("adjacency is not square");
  if (features.rows() != n) throw InvalidArgument("feature rows do not match node count");
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw InvalidArgument("label count does not match node count");
  }
  if (num_classes < 1) throw InvalidArgument("num_classes must be positive");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0.0) throw InvalidArgument("nonzero diagonal at node " + std::to_string(i));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double w = adjacency(i, j);
      if (w != adjacency(j, i)) {
        throw InvalidArgument("asymmetric adjacency at (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
      }
      if (!(w >= 0.0 && w <= 1.0)) {
        throw InvalidArgument("adjacency weight outside [0,1] at (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
      }
    }
  }
  if (!features.allFinite()) throw InvalidArgument("non-finite feature value");
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw InvalidArgument("label " + std::to_string(y) + " out of range");
  }
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  auto mark = [&](const std::vector<NodeId>& ids, const char* which) {
    for (NodeId id : ids) {
      if (id < 0 || id >= n) {
        throw InvalidArgument(std::string(which) + " id " + std::to_string(id) + " out of range");
      }
      if (seen[static_cast<std::size_t>(id)]++) {
        throw InvalidArgument("node " + std::to_string(id) + " appears twice in the split");
      }
    }
  };
  mark(split.train, "train");
  mark(split.test, "test");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) {
      throw InvalidArgument("node " + std::to_string(i) + " is in neither train nor test");
    }
  }
}

bool Graph::operator==(const Graph& other) const {
  return num_classes == other.num_classes && labels == other.labels &&
         split.train == other.split.train && split.test == other.split.test &&
         adjacency.rows() == other.adjacency.rows() && adjacency == other.adjacency &&
         features.rows() == other.features.rows() && features.cols() == other.features.cols() &&
         features == other.features;
}

std::int64_t count_edges(const Matrix& adjacency) {
  std::int64_t edges = 0;
  for (Eigen::Index j = 0; j < adjacency.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      if (adjacency(i, j) != 0.0) ++edges;
    }
  }
  return edges;
}

std::int64_t l0_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument("l0_distance: shape mismatch");
  }
  return (a.array() != b.array()).count();
}

Matrix normalize_adjacency(const Matrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) throw InvalidArgument("adjacency is not square");
  const Eigen::Index n = adjacency.rows();
  Eigen::VectorXd degree = adjacency.rowwise().sum().array() + 1.0;
  if ((degree.array() <= 0.0).any()) throw InvalidArgument("non-positive degree in normalization");
  const Eigen::VectorXd inv_sqrt = degree.array().rsqrt();
  Matrix normalized = adjacency + Matrix::Identity(n, n);
  normalized = inv_sqrt.asDiagonal() * normalized * inv_sqrt.asDiagonal();
  return normalized;
}

void flip_edge_inplace(Matrix& adjacency, NodeId u, NodeId v) {
  check_pair(adjacency, u, v);
  const double w = adjacency(u, v);
  if (w != 0.0 && w != 1.0) {
    throw InvalidArgument("cannot flip fractional edge weight at (" + std::to_string(u) + "," +
                          std::to_string(v) + ")");
  }
  adjacency(u, v) = 1.0 - w;
  adjacency(v, u) = 1.0 - adjacency(v, u);
}

Matrix flip_edge(const Matrix& adjacency, NodeId u, NodeId v) {
  Matrix out = adjacency;
  flip_edge_inplace(out, u, v);
  return out;
}

Budget edge_budget(const Graph& graph, double rate) {
  if (!(rate > 0.0 && rate <= 1.0)) {
    throw InfeasibleConfig("budget rate must be in (0,1], got " + std::to_string(rate));
  }
  const std::int64_t edges = count_edges(graph.adjacency);
  if (edges == 0) throw InfeasibleConfig("graph has no edges; budget undefined");
  // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
  const auto delta = static_cast<std::int64_t>(std::floor(rate * static_cast<double>(edges) + 1e-9));
  if (delta < 1) {
    throw InfeasibleConfig("budget rounds to zero (" + std::to_string(edges) + " edges at rate " +
                           std::to_string(rate) + ")");
  }
  return Budget{static_cast<int>(delta), rate};
}

double homophily_ratio(const Matrix& adjacency, const std::vector<int>& labels) {
  std::int64_t edges = 0;
  std::int64_t same = 0;
  for (Eigen::Index j = 0; j < adjacency.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      if (adjacency(i, j) == 0.0) continue;
      ++edges;
      if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) ++same;
    }
  }
  return edges == 0 ? 0.0 : static_cast<double>(same) / static_cast<double>(edges);
}

}  // namespace atkse
