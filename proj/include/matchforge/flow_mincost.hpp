#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "matchforge/data_model.hpp"
#include "matchforge/flow_maxcard.hpp"

namespace matchforge {

struct CostedResidualEdge {
  NodeId from = 0;
  NodeId to = 0;
  ResidualEdge edge;
  std::int64_t cost = 0;
};

// Residual edges with capacity 1 only. A forward copy costs +w, a backward
// copy -w; source and sink arcs use `source_sink_cost` in place of w.
struct CostedResidualGraph {
  std::size_t num_nodes = 0;
  std::vector<CostedResidualEdge> edges;
};

// Throws InvalidInput if the flow breaks capacity or conservation, or if a
// treated->control arc cost is not an integer.
CostedResidualGraph build_costed_residual(const FlowNetwork& network,
                                          std::int64_t source_sink_cost = 1);

struct NegativeCycle {
  std::vector<CostedResidualEdge> edges;  // edges[k].to == edges[k+1].from
  std::int64_t cost = 0;
};

// Bellman-Ford from a virtual super-source. After every relaxation round the
// predecessor graph is walked for a cycle; any such cycle is negative, and one
// appears whenever a negative cycle exists. Returns nullopt when a round
// relaxes nothing.
std::optional<NegativeCycle> find_negative_cycle(const CostedResidualGraph& g);

// Same scan, but returns every (vertex-disjoint) negative cycle present in
// the predecessor graph when the scan stops.
std::vector<NegativeCycle> find_negative_cycles(const CostedResidualGraph& g);

// Pushes one unit around the cycle. Throws std::logic_error if an edge has
// no residual capacity or the edges do not close up.
void cancel_cycle(FlowNetwork& network, const NegativeCycle& cycle);

// Sum of w over treated->control arcs carrying flow.
std::int64_t matching_cost(const FlowNetwork& network);

struct CancelEvent {
  std::size_t iteration = 0;
  std::int64_t cycle_cost = 0;
  std::int64_t total_cost = 0;  // after the cancel
  std::size_t cardinality = 0;
  const FlowNetwork* network = nullptr;
};

struct MinCostOptions {
  std::int64_t source_sink_cost = 1;
  // Grow the initial maximum flow from a cheapest-edge-first maximal matching
  // instead of the zero flow. Fewer cycles to cancel; same optimum.
  bool greedy_start = true;
  std::function<void(const CancelEvent&)> on_cancel;
};

struct MinCostResult {
  Matching matching;
  std::size_t cardinality = 0;
  std::int64_t total_cost = 0;
  std::int64_t initial_cost = 0;
  std::size_t max_cardinality = 0;
  std::size_t augmentations = 0;  // augmenting paths used for the initial flow
  std::size_t cycles_canceled = 0;
  std::size_t scans = 0;
  FlowNetwork network;
};

// Minimum-cost matching of cardinality exactly m by cycle canceling on an
// initial max-flow truncated to value m (its most expensive pairs dropped). Costs must be integers (integerize
// first). Throws Infeasible if m exceeds the maximum cardinality.
MinCostResult min_cost_matching(const BipartiteGraph& graph, std::size_t m,
                                const MinCostOptions& options = {});

}  // namespace matchforge
