// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string_view>
#include <vector>

#include "atkse/graph.hpp"

namespace atkse {

enum class FlipAction { add, remove };

/// "add" or "delete".
[[nodiscard]] std::string_view to_string(FlipAction a);

/// One applied edge flip.
struct FlipRecord {
  int iteration = 0;
  NodeId u = 0;
  NodeId v = 0;
  FlipAction action = FlipAction::add;
  double integral_gradient = 0.0;
  double saliency = 0.0;

  bool operator==(const FlipRecord&) const = default;
};

/// Sequence of flips plus an echo of the configuration that produced them.
struct PerturbationLog {
  std::string method;
  std::vector<FlipRecord> records;
  nlohmann::json config = nlohmann::json::object();
};

/// JSON Lines: one {"iter","u","v","action","g_int","saliency"} object per
/// flip, then a trailer {"trailer":true,"method":...,"config":{...}}.
[[nodiscard]] std::string to_jsonl(const PerturbationLog& log);
[[nodiscard]] PerturbationLog parse_jsonl(std::string_view text);
void write_jsonl(const PerturbationLog& log, const std::filesystem::path& path);

}  // namespace atkse
