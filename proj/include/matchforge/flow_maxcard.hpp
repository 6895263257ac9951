#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "matchforge/data_model.hpp"

namespace matchforge {

using NodeId = std::size_t;
using ArcId = std::size_t;

struct Arc {
  NodeId tail = 0;
  NodeId head = 0;
  double cost = 0.0;  // w_ij on treated->control arcs, 0 on source/sink arcs
};

// One residual direction of an arc as seen from a node.
struct Incidence {
  ArcId arc = 0;
  NodeId other = 0;
  bool outgoing = false;  // node is the arc's tail
};

// Unit-capacity source/sink network over a bipartite graph. Node 0 is the
// source, 1..N_T the treated units, then the controls, then the sink. Arcs are
// laid out as s->T (N_T), T->C (one per graph edge, in edge order), C->t
// (N_C).
class FlowNetwork {
 public:
  FlowNetwork() : FlowNetwork(BipartiteGraph{}) {}
  explicit FlowNetwork(const BipartiteGraph& graph);

  std::size_t num_treated() const { return num_treated_; }
  std::size_t num_control() const { return num_control_; }
  std::size_t num_nodes() const { return num_treated_ + num_control_ + 2; }
  std::size_t num_arcs() const { return arcs_.size(); }

  NodeId source() const { return 0; }
  NodeId sink() const { return num_nodes() - 1; }
  NodeId treated_node(Index i) const { return 1 + i; }
  NodeId control_node(Index j) const { return 1 + num_treated_ + j; }
  bool is_treated(NodeId v) const { return v >= 1 && v <= num_treated_; }
  bool is_control(NodeId v) const {
    return v > num_treated_ && v < sink();
  }

  ArcId source_arc(Index i) const { return i; }
  ArcId pair_arc(std::size_t edge) const { return num_treated_ + edge; }
  ArcId sink_arc(Index j) const { return num_treated_ + num_pairs_ + j; }
  bool is_pair_arc(ArcId a) const {
    return a >= num_treated_ && a < num_treated_ + num_pairs_;
  }
  std::size_t num_pair_arcs() const { return num_pairs_; }

  const Arc& arc(ArcId a) const { return arcs_[a]; }
  int flow(ArcId a) const { return flow_[a]; }
  void set_flow(ArcId a, int f) { flow_[a] = static_cast<std::uint8_t>(f); }
  static constexpr int capacity(ArcId) { return 1; }

  // Incident arcs sorted by the other endpoint's node id.
  std::span<const Incidence> incident(NodeId v) const;

  // Total flow out of the source.
  std::size_t value() const;
  // Pairs (treated, control) whose arc carries flow.
  Matching induced_matching() const;
  // First broken capacity or conservation constraint, or nullopt.
  std::optional<std::string> check_invariants() const;

 private:
  std::size_t num_treated_ = 0;
  std::size_t num_control_ = 0;
  std::size_t num_pairs_ = 0;
  std::vector<Arc> arcs_;
  std::vector<std::uint8_t> flow_;
  std::vector<std::size_t> offsets_;
  std::vector<Incidence> incidences_;
};

// A residual edge: the forward or backward copy of a network arc.
struct ResidualEdge {
  ArcId arc = 0;
  bool forward = true;

  friend bool operator==(const ResidualEdge&, const ResidualEdge&) = default;
};

// Residual capacities derived from the flow on demand: forward 1 - f,
// backward f.
class ResidualGraph {
 public:
  explicit ResidualGraph(const FlowNetwork& network) : net_(&network) {}

  const FlowNetwork& network() const { return *net_; }
  int capacity(ResidualEdge e) const {
    const int f = net_->flow(e.arc);
    return e.forward ? FlowNetwork::capacity(e.arc) - f : f;
  }
  NodeId from(ResidualEdge e) const {
    const Arc& a = net_->arc(e.arc);
    return e.forward ? a.tail : a.head;
  }
  NodeId to(ResidualEdge e) const {
    const Arc& a = net_->arc(e.arc);
    return e.forward ? a.head : a.tail;
  }

 private:
  const FlowNetwork* net_;
};

using AugmentingPath = std::vector<ResidualEdge>;

FlowNetwork build_flow_network(const BipartiteGraph& graph);

// Breadth-first search for an s -> t path of unit residual capacity, fewest
// hops first, neighbours visited in ascending node order.
std::optional<AugmentingPath> find_augmenting_path(const ResidualGraph& residual);

// Pushes one unit along `path`. Throws std::logic_error if the path is not a
// valid s -> t path with capacity on every edge.
void augment(FlowNetwork& network, const AugmentingPath& path);

struct MaxCardResult {
  std::size_t cardinality = 0;
  Matching matching;
  FlowNetwork network;
  std::size_t augmentations = 0;
};

// Ford-Fulkerson from the zero flow. `on_augment`, if set, sees the network
// after every augmentation.
MaxCardResult max_cardinality(
    const BipartiteGraph& graph,
    const std::function<void(const FlowNetwork&)>& on_augment = {});

}  // namespace matchforge
