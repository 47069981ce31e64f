// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace atkse {

using Rng = std::mt19937_64;

/// Seed of the named substream `stream` (e.g. "noise", "baseline") at `index`.
/// Distinct (stream, index) pairs give statistically independent generators.
[[nodiscard]] std::uint64_t substream_seed(std::uint64_t seed, std::string_view stream,
                                           std::uint64_t index = 0);

[[nodiscard]] inline Rng make_rng(std::uint64_t seed, std::string_view stream,
                                  std::uint64_t index = 0) {
  return Rng(substream_seed(seed, stream, index));
}

}  // namespace atkse
