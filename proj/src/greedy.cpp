#include "matchforge/greedy.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "matchforge/error.hpp"

namespace matchforge {

namespace {

struct Candidate {
  double cost;
  Index control;
};

bool cheaper(const Candidate& a, const Candidate& b) {
  return a.cost != b.cost ? a.cost < b.cost : a.control < b.control;
}

// Step 2 of the greedy algorithm for one treated unit: the k most similar
// eligible controls, ties to the lowest control index.
GreedyStep pick_controls(const BipartiteGraph& graph, Index treated,
                         const std::vector<bool>& used, std::size_t k) {
  std::vector<Candidate> eligible;
  for (const auto& e : graph.edges_of(treated)) {
    if (!used[e.control]) eligible.push_back({e.cost, e.control});
  }
  const std::size_t take = std::min(k, eligible.size());
  std::partial_sort(eligible.begin(),
                    eligible.begin() + static_cast<std::ptrdiff_t>(take),
                    eligible.end(), cheaper);
  GreedyStep step;
  step.treated = treated;
  for (std::size_t l = 0; l < take; ++l) {
    step.controls.push_back(eligible[l].control);
    step.costs.push_back(eligible[l].cost);
  }
  return step;
}

// Next treated unit under kMaxCostFirst, or nullopt if no remaining
// unit has an eligible edge.
std::optional<Index> largest_edge_owner(const BipartiteGraph& graph,
                                        const std::vector<bool>& done,
                                        const std::vector<bool>& used) {
  std::optional<Index> best;
  double best_cost = 0.0;
  for (Index i = 0; i < graph.num_treated(); ++i) {
    if (done[i]) continue;
    for (const auto& e : graph.edges_of(i)) {
      if (used[e.control]) continue;
      if (!best || e.cost > best_cost) {
        best = i;
        best_cost = e.cost;
      }
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(GreedyOrder order) {
  switch (order) {
    case GreedyOrder::kInput:
      return "input";
    case GreedyOrder::kRandom:
      return "random";
    case GreedyOrder::kMaxCostFirst:
      return "max-cost-first";
  }
  return "unknown";
}

GreedyOrder parse_greedy_order(std::string_view name) {
  for (auto o : {GreedyOrder::kInput, GreedyOrder::kRandom,
                 GreedyOrder::kMaxCostFirst}) {
    if (name == to_string(o)) return o;
  }
  throw InvalidInput("unknown greedy order '" + std::string(name) + "'");
}

void GreedyConfig::validate() const {
  if (k == 0) throw InvalidInput("greedy k must be >= 1");
  if ((order == GreedyOrder::kRandom) != seed.has_value()) {
    throw InvalidInput("a seed is required exactly when the order is random");
  }
}

std::vector<Index> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    // Uniform draw in [0, i) by rejection.
    const std::uint64_t bound = i;
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        (std::numeric_limits<std::uint64_t>::max() % bound);
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(perm[i - 1], perm[r % bound]);
  }
  return perm;
}

GreedyResult greedy_match(const BipartiteGraph& graph,
                          const GreedyConfig& config) {
  config.validate();
  GreedyResult result;
  result.matching.mode =
      config.replacement ? Replacement::kWith : Replacement::kWithout;
  result.matching.ratio = config.k;

  const std::size_t nt = graph.num_treated();
  std::vector<bool> used(graph.num_control(), false);

  auto record = [&](GreedyStep step) {
    if (step.controls.empty()) result.unmatched_treated.push_back(step.treated);
    for (Index j : step.controls) {
      result.matching.pairs.push_back({step.treated, j});
      if (!config.replacement) used[j] = true;
    }
    result.order.push_back(step.treated);
    result.steps.push_back(std::move(step));
  };

  if (config.order == GreedyOrder::kMaxCostFirst) {
    std::vector<bool> done(nt, false);
    while (auto next = largest_edge_owner(graph, done, used)) {
      done[*next] = true;
      record(pick_controls(graph, *next, used, config.k));
    }
    // Whatever is left has no eligible control.
    for (Index i = 0; i < nt; ++i) {
      if (!done[i]) record(GreedyStep{i, {}, {}});
    }
  } else {
    std::vector<Index> order(nt);
    if (config.order == GreedyOrder::kRandom) {
      order = seeded_permutation(nt, *config.seed);
    } else {
      std::iota(order.begin(), order.end(), Index{0});
    }
    for (Index i : order) record(pick_controls(graph, i, used, config.k));
  }
  std::sort(result.unmatched_treated.begin(), result.unmatched_treated.end());
  return result;
}

}  // namespace matchforge
