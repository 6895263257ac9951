#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "matchforge/data_model.hpp"

namespace matchforge {

enum class GreedyOrder {
  kInput,
  kRandom,
  // Each round picks the remaining treated unit incident to the largest-cost
  // eligible edge.
  kMaxCostFirst,
};

std::string_view to_string(GreedyOrder order);
GreedyOrder parse_greedy_order(std::string_view name);

struct GreedyConfig {
  GreedyOrder order = GreedyOrder::kInput;
  std::optional<std::uint64_t> seed;  // present iff order == kRandom
  std::size_t k = 1;
  bool replacement = false;

  // Throws InvalidInput when the invariants above are broken.
  void validate() const;
};

struct GreedyStep {
  Index treated = 0;
  std::vector<Index> controls;  // empty when nothing was eligible
  std::vector<double> costs;
};

struct GreedyResult {
  Matching matching;
  std::vector<Index> order;  // treated units in selection order
  std::vector<GreedyStep> steps;
  std::vector<Index> unmatched_treated;
};

GreedyResult greedy_match(const BipartiteGraph& graph,
                          const GreedyConfig& config);

// Seeded Fisher-Yates permutation of 0..n-1 (mt19937_64, rejection sampling)
// so results do not depend on the standard library's distributions.
std::vector<Index> seeded_permutation(std::size_t n, std::uint64_t seed);

}  // namespace matchforge
