#include "matchforge/flow_maxcard.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace matchforge {

namespace {
constexpr NodeId kUnreached = std::numeric_limits<NodeId>::max();
}

FlowNetwork::FlowNetwork(const BipartiteGraph& graph)
    : num_treated_(graph.num_treated()),
      num_control_(graph.num_control()),
      num_pairs_(graph.num_edges()) {
  arcs_.reserve(num_treated_ + num_pairs_ + num_control_);
  for (Index i = 0; i < num_treated_; ++i) {
    arcs_.push_back({source(), treated_node(i), 0.0});
  }
  for (const auto& e : graph.edges()) {
    arcs_.push_back({treated_node(e.treated), control_node(e.control), e.cost});
  }
  for (Index j = 0; j < num_control_; ++j) {
    arcs_.push_back({control_node(j), sink(), 0.0});
  }
  flow_.assign(arcs_.size(), 0);

  offsets_.assign(num_nodes() + 1, 0);
  for (const auto& a : arcs_) {
    ++offsets_[a.tail + 1];
    ++offsets_[a.head + 1];
  }
  for (std::size_t v = 0; v < num_nodes(); ++v) offsets_[v + 1] += offsets_[v];
  incidences_.resize(2 * arcs_.size());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (ArcId id = 0; id < arcs_.size(); ++id) {
    const Arc& a = arcs_[id];
    incidences_[fill[a.tail]++] = {id, a.head, true};
    incidences_[fill[a.head]++] = {id, a.tail, false};
  }
  for (std::size_t v = 0; v < num_nodes(); ++v) {
    std::sort(incidences_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]),
              incidences_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]),
              [](const Incidence& x, const Incidence& y) {
                return x.other < y.other;
              });
  }
}

std::span<const Incidence> FlowNetwork::incident(NodeId v) const {
  return std::span<const Incidence>(incidences_)
      .subspan(offsets_[v], offsets_[v + 1] - offsets_[v]);
}

std::size_t FlowNetwork::value() const {
  std::size_t total = 0;
  for (Index i = 0; i < num_treated_; ++i) total += flow_[source_arc(i)];
  return total;
}

Matching FlowNetwork::induced_matching() const {
  Matching m;
  for (std::size_t e = 0; e < num_pairs_; ++e) {
    const ArcId id = pair_arc(e);
    if (flow_[id] == 1) {
      m.pairs.push_back({arcs_[id].tail - 1, arcs_[id].head - 1 - num_treated_});
    }
  }
  return m;
}

std::optional<std::string> FlowNetwork::check_invariants() const {
  std::vector<long> balance(num_nodes(), 0);
  for (ArcId id = 0; id < arcs_.size(); ++id) {
    const int f = flow_[id];
    if (f < 0 || f > capacity(id)) {
      return "arc " + std::to_string(id) + " violates capacity (flow " +
             std::to_string(f) + ")";
    }
    balance[arcs_[id].tail] -= f;
    balance[arcs_[id].head] += f;
  }
  for (NodeId v = 1; v + 1 < num_nodes(); ++v) {
    if (balance[v] != 0) {
      return "node " + std::to_string(v) + " violates conservation (net " +
             std::to_string(balance[v]) + ")";
    }
  }
  if (-balance[source()] != balance[sink()]) {
    return "source outflow differs from sink inflow";
  }
  return std::nullopt;
}

FlowNetwork build_flow_network(const BipartiteGraph& graph) {
  return FlowNetwork(graph);
}

std::optional<AugmentingPath> find_augmenting_path(
    const ResidualGraph& residual) {
  const FlowNetwork& net = residual.network();
  std::vector<NodeId> parent_node(net.num_nodes(), kUnreached);
  std::vector<ResidualEdge> parent_edge(net.num_nodes());
  std::vector<NodeId> queue;
  queue.reserve(net.num_nodes());
  queue.push_back(net.source());
  parent_node[net.source()] = net.source();
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId v = queue[head];
    for (const Incidence& inc : net.incident(v)) {
      if (parent_node[inc.other] != kUnreached) continue;
      const ResidualEdge e{inc.arc, inc.outgoing};
      if (residual.capacity(e) <= 0) continue;
      parent_node[inc.other] = v;
      parent_edge[inc.other] = e;
      if (inc.other == net.sink()) {
        AugmentingPath path;
        for (NodeId u = net.sink(); u != net.source(); u = parent_node[u]) {
          path.push_back(parent_edge[u]);
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      queue.push_back(inc.other);
    }
  }
  return std::nullopt;
}

void augment(FlowNetwork& network, const AugmentingPath& path) {
  const ResidualGraph residual(network);
  NodeId at = network.source();
  for (const ResidualEdge& e : path) {
    if (e.arc >= network.num_arcs() || residual.from(e) != at ||
        residual.capacity(e) <= 0) {
      throw std::logic_error("augment: path is not a residual s-t path");
    }
    at = residual.to(e);
  }
  if (at != network.sink() || path.empty()) {
    throw std::logic_error("augment: path does not end at the sink");
  }
  for (const ResidualEdge& e : path) {
    network.set_flow(e.arc, network.flow(e.arc) + (e.forward ? 1 : -1));
  }
}

MaxCardResult max_cardinality(
    const BipartiteGraph& graph,
    const std::function<void(const FlowNetwork&)>& on_augment) {
  MaxCardResult result{0, {}, FlowNetwork(graph), 0};
  while (auto path = find_augmenting_path(ResidualGraph(result.network))) {
    augment(result.network, *path);
    ++result.augmentations;
    if (on_augment) on_augment(result.network);
  }
  result.matching = result.network.induced_matching();
  result.cardinality = result.matching.size();
  return result;
}

}  // namespace matchforge
