// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "atkse/attack.hpp"
#include "atkse/graph.hpp"
#include "atkse/rng.hpp"
#include "atkse/surrogate.hpp"

namespace atkse {

enum class BaselineKind { random, dice };

[[nodiscard]] std::string_view to_string(BaselineKind kind);

/// Flips budget.delta distinct, uniformly random unordered pairs. Whether a
/// flip adds or deletes follows from the pair's current state.
/// Throws InfeasibleConfig if the graph has fewer than delta pairs.
[[nodiscard]] AttackResult random_attack(const Graph& graph, const Budget& budget, Rng& rng);

/// Labels as a gray-box attacker sees them: ground truth on train nodes and
/// the prediction of a surrogate trained with `config` on test nodes.
[[nodiscard]] std::vector<int> attacker_labels(const Graph& graph, const TrainConfig& config);

/// DICE: each step flips a fair coin between deleting a random existing
/// same-class edge and adding a random absent cross-class edge, falling back
/// to the other action when its pool is empty. `labels` decides class
/// membership. Throws InfeasibleConfig when both pools are empty.
[[nodiscard]] AttackResult dice_attack(const Graph& graph, const Budget& budget, std::span<const int> labels,
                                       Rng& rng);

}  // namespace atkse
