#include "matchforge/flow_mincost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "matchforge/dissimilarity.hpp"
#include "matchforge/error.hpp"

namespace matchforge {

namespace {

constexpr std::size_t kNoEdge = std::numeric_limits<std::size_t>::max();

std::int64_t arc_cost(const FlowNetwork& net, ArcId a,
                      std::int64_t source_sink_cost) {
  if (!net.is_pair_arc(a)) return source_sink_cost;
  return static_cast<std::int64_t>(net.arc(a).cost);
}

// Outgoing-edge CSR over a costed residual graph.
struct OutEdges {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> ids;

  explicit OutEdges(const CostedResidualGraph& g)
      : offsets(g.num_nodes + 1, 0), ids(g.edges.size()) {
    for (const auto& e : g.edges) ++offsets[e.from + 1];
    for (std::size_t v = 0; v < g.num_nodes; ++v) offsets[v + 1] += offsets[v];
    std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
      ids[fill[g.edges[k].from]++] = k;
    }
  }
};

// Cycles of the predecessor graph (each node has at most one parent edge, so
// cycles are vertex-disjoint). Nodes are scanned in ascending order.
std::vector<NegativeCycle> parent_cycles(const CostedResidualGraph& g,
                                         const std::vector<std::size_t>& parent,
                                         bool first_only) {
  const std::size_t n = g.num_nodes;
  std::vector<std::size_t> stamp(n, 0);  // 0 = unvisited
  std::vector<NegativeCycle> out;
  for (NodeId start = 0; start < n; ++start) {
    if (stamp[start] != 0) continue;
    const std::size_t mark = start + 1;
    NodeId v = start;
    while (v != kNoEdge && stamp[v] == 0) {
      stamp[v] = mark;
      v = parent[v] == kNoEdge ? kNoEdge : g.edges[parent[v]].from;
    }
    if (v == kNoEdge || stamp[v] != mark) continue;
    // v lies on a cycle first closed during this walk.
    NegativeCycle cycle;
    NodeId u = v;
    do {
      const auto& e = g.edges[parent[u]];
      cycle.edges.push_back(e);
      cycle.cost += e.cost;
      u = e.from;
    } while (u != v);
    std::reverse(cycle.edges.begin(), cycle.edges.end());
    if (cycle.cost < 0) {
      out.push_back(std::move(cycle));
      if (first_only) return out;
    }
  }
  return out;
}

// `dist` holds the starting labels (all zero for a plain super-source scan)
// and receives the final ones. Any finite start works: parents are reset, so
// every predecessor cycle is still negative.
std::vector<NegativeCycle> bellman_ford_scan(const CostedResidualGraph& g,
                                             bool first_only,
                                             std::vector<std::int64_t>& dist) {
  const std::size_t n = g.num_nodes;
  if (n == 0 || g.edges.empty()) return {};
  const OutEdges out(g);
  dist.resize(n, 0);
  std::vector<std::size_t> parent(n, kNoEdge);
  std::vector<NodeId> active(n);
  for (NodeId v = 0; v < n; ++v) active[v] = v;
  std::vector<std::uint8_t> queued(n, 0);
  std::vector<NodeId> next;
  // Without a negative cycle labels settle within |V| rounds. With one, labels
  // keep falling, and since an acyclic predecessor graph bounds every label
  // from below (start label plus a simple-path cost), a predecessor cycle
  // must appear.
  for (;;) {
    next.clear();
    for (NodeId v : active) {
      for (std::size_t k = out.offsets[v]; k < out.offsets[v + 1]; ++k) {
        const auto& e = g.edges[out.ids[k]];
        const std::int64_t cand = dist[v] + e.cost;
        if (cand < dist[e.to]) {
          dist[e.to] = cand;
          parent[e.to] = out.ids[k];
          if (!queued[e.to]) {
            queued[e.to] = 1;
            next.push_back(e.to);
          }
        }
      }
    }
    if (next.empty()) return {};
    auto cycles = parent_cycles(g, parent, first_only);
    if (!cycles.empty()) return cycles;
    std::sort(next.begin(), next.end());
    for (NodeId v : next) queued[v] = 0;
    active.swap(next);
  }
}

// Maximal matching over edges taken cheapest first, then augmenting paths
// until the flow is maximum.
MaxCardResult greedy_start_max_flow(const BipartiteGraph& graph) {
  MaxCardResult r;
  r.network = build_flow_network(graph);
  FlowNetwork& net = r.network;
  std::vector<std::size_t> order(graph.num_edges());
  for (std::size_t e = 0; e < order.size(); ++e) order[e] = e;
  const auto edges = graph.edges();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return edges[a].cost < edges[b].cost;
  });
  for (std::size_t e : order) {
    const ArcId s = net.source_arc(edges[e].treated);
    const ArcId t = net.sink_arc(edges[e].control);
    if (net.flow(s) || net.flow(t)) continue;
    net.set_flow(s, 1);
    net.set_flow(net.pair_arc(e), 1);
    net.set_flow(t, 1);
  }
  while (auto path = find_augmenting_path(ResidualGraph(net))) {
    augment(net, *path);
    ++r.augmentations;
  }
  r.cardinality = net.value();
  r.matching = net.induced_matching();
  return r;
}

}  // namespace

CostedResidualGraph build_costed_residual(const FlowNetwork& network,
                                          std::int64_t source_sink_cost) {
  if (auto broken = network.check_invariants()) {
    throw InvalidInput("infeasible flow: " + *broken);
  }
  CostedResidualGraph g;
  g.num_nodes = network.num_nodes();
  g.edges.reserve(network.num_arcs());
  for (ArcId a = 0; a < network.num_arcs(); ++a) {
    const Arc& arc = network.arc(a);
    if (network.is_pair_arc(a) && arc.cost != std::floor(arc.cost)) {
      throw InvalidInput("residual costs need integer edge costs; integerize first");
    }
    const std::int64_t w = arc_cost(network, a, source_sink_cost);
    if (network.flow(a) == 0) {
      g.edges.push_back({arc.tail, arc.head, {a, true}, w});
    } else {
      g.edges.push_back({arc.head, arc.tail, {a, false}, -w});
    }
  }
  return g;
}

std::optional<NegativeCycle> find_negative_cycle(const CostedResidualGraph& g) {
  std::vector<std::int64_t> dist;
  auto cycles = bellman_ford_scan(g, true, dist);
  if (cycles.empty()) return std::nullopt;
  return std::move(cycles.front());
}

std::vector<NegativeCycle> find_negative_cycles(const CostedResidualGraph& g) {
  std::vector<std::int64_t> dist;
  return bellman_ford_scan(g, false, dist);
}

void cancel_cycle(FlowNetwork& network, const NegativeCycle& cycle) {
  if (cycle.edges.empty()) throw std::logic_error("cancel_cycle: empty cycle");
  const ResidualGraph residual(network);
  for (std::size_t k = 0; k < cycle.edges.size(); ++k) {
    const auto& e = cycle.edges[k];
    const auto& following = cycle.edges[(k + 1) % cycle.edges.size()];
    if (e.edge.arc >= network.num_arcs() || residual.capacity(e.edge) <= 0 ||
        residual.from(e.edge) != e.from || residual.to(e.edge) != e.to ||
        e.to != following.from) {
      throw std::logic_error("cancel_cycle: cycle inconsistent with flow");
    }
  }
  for (const auto& e : cycle.edges) {
    network.set_flow(e.edge.arc,
                     network.flow(e.edge.arc) + (e.edge.forward ? 1 : -1));
  }
}

std::int64_t matching_cost(const FlowNetwork& network) {
  std::int64_t total = 0;
  for (std::size_t e = 0; e < network.num_pair_arcs(); ++e) {
    const ArcId a = network.pair_arc(e);
    if (network.flow(a) == 1) total += static_cast<std::int64_t>(network.arc(a).cost);
  }
  return total;
}

MinCostResult min_cost_matching(const BipartiteGraph& graph, std::size_t m,
                                const MinCostOptions& options) {
  if (!graph.has_integral_costs()) {
    throw InvalidInput(
        "min_cost_matching needs integer costs; integerize them first");
  }
  const double nodes = static_cast<double>(graph.num_treated() +
                                           graph.num_control() + 2);
  const double bound =
      (graph.max_cost() + static_cast<double>(std::abs(options.source_sink_cost))) *
      nodes;
  if (!(bound < 4.0e18)) {
    throw LimitExceeded("edge costs too large for exact path sums");
  }

  MaxCardResult maxflow = options.greedy_start ? greedy_start_max_flow(graph)
                                               : max_cardinality(graph);
  if (m > maxflow.cardinality) {
    throw Infeasible("requested cardinality " + std::to_string(m) +
                     " exceeds the maximum " +
                     std::to_string(maxflow.cardinality));
  }
  MinCostResult result;
  result.max_cardinality = maxflow.cardinality;
  result.augmentations = maxflow.augmentations;
  result.network = std::move(maxflow.network);
  FlowNetwork& net = result.network;

  if (maxflow.cardinality > m) {
    // Drop the most expensive s->T->C->t paths until the flow value is m.
    std::vector<std::size_t> used;
    for (std::size_t e = 0; e < net.num_pair_arcs(); ++e) {
      if (net.flow(net.pair_arc(e)) == 1) used.push_back(e);
    }
    std::stable_sort(used.begin(), used.end(), [&](std::size_t a, std::size_t b) {
      return net.arc(net.pair_arc(a)).cost > net.arc(net.pair_arc(b)).cost;
    });
    const std::size_t drop = maxflow.cardinality - m;
    for (std::size_t k = 0; k < drop; ++k) {
      const ArcId a = net.pair_arc(used[k]);
      const Arc& arc = net.arc(a);
      net.set_flow(a, 0);
      net.set_flow(net.source_arc(arc.tail - 1), 0);
      net.set_flow(net.sink_arc(arc.head - 1 - net.num_treated()), 0);
    }
  }

  std::int64_t total = matching_cost(net);
  result.initial_cost = total;
  // Labels carry over between scans: after a few cancels most of them are
  // still tight. Reset before they can drift towards overflow.
  std::vector<std::int64_t> labels;
  const std::int64_t drift_limit = static_cast<std::int64_t>(1.0e18 - bound);
  for (;;) {
    const CostedResidualGraph residual =
        build_costed_residual(net, options.source_sink_cost);
    ++result.scans;
    if (!labels.empty() &&
        *std::min_element(labels.begin(), labels.end()) < -drift_limit) {
      labels.assign(labels.size(), 0);
    }
    const std::vector<NegativeCycle> cycles =
        bellman_ford_scan(residual, false, labels);
    if (cycles.empty()) break;
    for (const auto& cycle : cycles) {
      cancel_cycle(net, cycle);
      total += cycle.cost;
      ++result.cycles_canceled;
      if (options.on_cancel) {
        options.on_cancel(
            {result.cycles_canceled, cycle.cost, total, net.value(), &net});
      }
    }
  }
  result.matching = net.induced_matching();
  result.cardinality = result.matching.size();
  result.total_cost = matching_cost(net);
  return result;
}

}  // namespace matchforge
