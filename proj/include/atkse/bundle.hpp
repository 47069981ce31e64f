// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "atkse/graph.hpp"

namespace atkse {

/// Reads a graph bundle directory:
///   meta.json     {"num_nodes", "num_features", "num_classes"}
///   edges.tsv     "u<TAB>v" per line (either orientation, optional third weight column)
///   features.tsv  one tab-separated row of reals per node
///   labels.tsv    "node_id<TAB>class"
///   split.json    {"train": [ids], "test": [ids]}
/// Throws IoError for missing/malformed files and InvalidArgument for
/// out-of-range ids, self-loops, conflicting duplicate edges or bad labels.
[[nodiscard]] Graph load_graph_bundle(const std::filesystem::path& dir);

/// Writes `graph` as a bundle, creating `dir` if needed. Edges are emitted
/// once per unordered pair as "u<TAB>v" with u < v in lexicographic order;
/// features use the shortest representation that round-trips exactly.
void save_graph_bundle(const Graph& graph, const std::filesystem::path& dir);

}  // namespace atkse
