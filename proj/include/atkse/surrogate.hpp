// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "atkse/graph.hpp"

namespace atkse {

enum class Activation { relu, tanh, identity };

[[nodiscard]] std::string_view to_string(Activation a);
/// Parses "relu", "tanh" or "identity"; throws InvalidArgument otherwise.
[[nodiscard]] Activation parse_activation(std::string_view name);

/// Optimization settings for the 2-layer GCN (full-batch SGD with momentum).
struct TrainConfig {
  int hidden_dim = 16;
  Activation activation = Activation::relu;
  int epochs = 200;
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  double init_scale = 1.0;
  std::uint64_t seed = 0;

  /// ReLU, 16 hidden units.
  static TrainConfig surrogate_defaults() { return {}; }
  /// tanh, 32 hidden units; otherwise identical to the surrogate.
  static TrainConfig victim_defaults() {
    TrainConfig c;
    c.hidden_dim = 32;
    c.activation = Activation::tanh;
    return c;
  }
};

/// Weights of softmax(Â act(Â X W0) W1).
struct SurrogateParams {
  Matrix w0;  // num_features x hidden_dim
  Matrix w1;  // hidden_dim x num_classes
  Activation activation = Activation::relu;

  [[nodiscard]] int hidden_dim() const { return static_cast<int>(w0.cols()); }
  [[nodiscard]] int num_classes() const { return static_cast<int>(w1.cols()); }
  bool operator==(const SurrogateParams& o) const {
    return activation == o.activation && w0.rows() == o.w0.rows() && w0.cols() == o.w0.cols() &&
           w1.rows() == o.w1.rows() && w1.cols() == o.w1.cols() && w0 == o.w0 && w1 == o.w1;
  }
};

/// Trains on graph.split.train for exactly config.epochs full-batch steps.
/// The per-epoch training loss (cross-entropy plus L2 term, evaluated before
/// each update) is appended to `loss_history` when non-null.
/// Throws InvalidArgument on bad config/graph and NumericalError if the loss
/// becomes non-finite.
[[nodiscard]] SurrogateParams train_surrogate(const Graph& graph, const TrainConfig& config,
                                              std::vector<double>* loss_history = nullptr);

/// Per-node class probabilities. Fractional adjacency weights are allowed.
[[nodiscard]] Matrix forward(const SurrogateParams& params, const Matrix& adjacency,
                             const Matrix& features);

/// Argmax of forward(), ties broken towards the lowest class index.
[[nodiscard]] std::vector<int> predict(const SurrogateParams& params, const Matrix& adjacency,
                                       const Matrix& features);

/// Mean of log P(y_i) over node_set; always <= 0. The attacker maximizes it.
[[nodiscard]] double attack_loss(const Matrix& probs, std::span<const int> labels,
                                 std::span<const NodeId> node_set);

/// Analytic gradient of attack_loss with respect to every adjacency entry.
///
/// The derivative is taken through the degree terms of the normalization,
/// treating each A[i][j] as an independent variable, and then symmetrized as
/// g + gᵀ so that entry (u,v) is the derivative along the undirected edge
/// direction e_uv + e_vu. The diagonal is zero.
[[nodiscard]] Matrix adjacency_gradient(const SurrogateParams& params, const Matrix& adjacency,
                                        const Matrix& features, std::span<const int> labels,
                                        std::span<const NodeId> node_set);

/// Total number of adjacency_gradient() calls made by this process.
[[nodiscard]] std::uint64_t adjacency_gradient_evaluations();

/// Central differences (L(A + h E) - L(A - h E)) / 2h with E = e_uv + e_vu,
/// one estimate per entry. Throws InvalidArgument for h <= 0 or diagonal
/// entries and NumericalError if h is too small to move an entry.
[[nodiscard]] std::vector<double> finite_diff_adjacency_gradient(
    const SurrogateParams& params, const Matrix& adjacency, const Matrix& features,
    std::span<const int> labels, std::span<const NodeId> node_set, double h,
    std::span<const std::pair<NodeId, NodeId>> entries);

/// True if moving the (u,v) weight by ±h flips the sign of any ReLU
/// pre-activation, i.e. the central difference straddles a kink.
[[nodiscard]] bool crosses_activation_kink(const SurrogateParams& params, const Matrix& adjacency,
                                           const Matrix& features, NodeId u, NodeId v, double h);

/// Checkpoint as a single JSON document (dims, activation, seed, weights).
void save_params(const SurrogateParams& params, std::uint64_t seed, const std::filesystem::path& path);
[[nodiscard]] SurrogateParams load_params(const std::filesystem::path& path);

}  // namespace atkse
