// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "atkse/graph.hpp"

namespace atkse {

struct SbmConfig {
  int num_nodes = 100;
  int num_classes = 2;
  double p_in = 0.1;
  double p_out = 0.01;
  int num_features = 20;
  /// Mean offset added to the class-specific feature block.
  double feature_shift = 0.5;
  /// Fraction of each class placed in the train split.
  double train_fraction = 0.1;
  std::uint64_t seed = 0;
};

/// Stochastic block model with equal-size contiguous blocks.
///
/// Node i belongs to class i / (num_nodes / num_classes). Edges are drawn
/// independently with probability p_in inside a block and p_out across blocks.
/// Features are standard normal; class k additionally gets +feature_shift on
/// its own block of floor(num_features / num_classes) coordinates. The split
/// is stratified: round(train_fraction * block size) nodes per class (at
/// least one) go to train, the rest to test. Both lists are sorted.
[[nodiscard]] Graph generate_sbm(const SbmConfig& config);

}  // namespace atkse
