#include "matchforge/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "matchforge/error.hpp"

namespace matchforge {

namespace {

void require_distinct(const std::vector<std::string>& ids, const char* side) {
  std::unordered_set<std::string> seen;
  seen.reserve(ids.size());
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw InvalidInput(std::string("duplicate ") + side + " id '" + id + "'");
    }
  }
}

std::unordered_map<std::string, Index> index_of(
    const std::vector<std::string>& ids) {
  std::unordered_map<std::string, Index> map;
  map.reserve(ids.size());
  for (Index i = 0; i < ids.size(); ++i) map.emplace(ids[i], i);
  return map;
}

std::vector<std::string> numbered(char prefix, std::size_t n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

}  // namespace

std::size_t validate_units(std::span<const Unit> units) {
  if (units.empty()) return 0;
  const std::size_t p = units.front().covariates.size();
  for (const auto& u : units) {
    if (u.treatment != 0 && u.treatment != 1) {
      throw InvalidInput("unit '" + u.id + "': treatment must be 0 or 1");
    }
    if (u.covariates.size() != p) {
      throw InvalidInput("unit '" + u.id + "': expected " + std::to_string(p) +
                         " covariates, got " +
                         std::to_string(u.covariates.size()));
    }
  }
  return p;
}

CostMatrix CostMatrix::dense(DenseMatrix<double> costs) {
  CostMatrix m;
  m.allowed = DenseMatrix<std::uint8_t>(costs.rows, costs.cols, 1);
  double max_finite = 0.0;
  bool any = false;
  for (double v : costs.data) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidInput("cost matrix entries must be finite and non-negative");
    }
    max_finite = any ? std::max(max_finite, v) : v;
    any = true;
  }
  m.sentinel = any ? max_finite + 1.0 : 1.0;
  m.values = std::move(costs);
  return m;
}

std::size_t AdjacencyList::edge_count() const {
  std::size_t n = 0;
  for (const auto& v : neighbors) n += v.size();
  return n;
}

BipartiteGraph::BipartiteGraph(std::vector<std::string> treated_ids,
                               std::vector<std::string> control_ids,
                               std::vector<Edge> edges)
    : treated_ids_(std::move(treated_ids)),
      control_ids_(std::move(control_ids)),
      edges_(std::move(edges)) {
  require_distinct(treated_ids_, "treated");
  require_distinct(control_ids_, "control");
  {
    const std::unordered_set<std::string_view> treated(treated_ids_.begin(),
                                                       treated_ids_.end());
    for (const auto& id : control_ids_) {
      if (treated.count(id)) {
        throw InvalidInput("id '" + id + "' is both treated and control");
      }
    }
  }
  for (const auto& e : edges_) {
    if (e.treated >= treated_ids_.size()) {
      throw InvalidInput("edge references treated index " +
                         std::to_string(e.treated) + " out of range");
    }
    if (e.control >= control_ids_.size()) {
      throw InvalidInput("edge references control index " +
                         std::to_string(e.control) + " out of range");
    }
    if (!std::isfinite(e.cost) || e.cost < 0.0) {
      throw InvalidInput("edge (" + treated_ids_[e.treated] + ", " +
                         control_ids_[e.control] +
                         "): cost must be finite and non-negative");
    }
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.treated != b.treated ? a.treated < b.treated
                                  : a.control < b.control;
  });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (edges_[k].treated == edges_[k - 1].treated &&
        edges_[k].control == edges_[k - 1].control) {
      throw InvalidInput("duplicate edge (" + treated_ids_[edges_[k].treated] +
                         ", " + control_ids_[edges_[k].control] + ")");
    }
  }
  row_offsets_.assign(treated_ids_.size() + 1, 0);
  for (const auto& e : edges_) ++row_offsets_[e.treated + 1];
  for (std::size_t i = 0; i < treated_ids_.size(); ++i) {
    row_offsets_[i + 1] += row_offsets_[i];
  }
}

BipartiteGraph BipartiteGraph::with_default_ids(std::size_t num_treated,
                                                std::size_t num_control,
                                                std::vector<Edge> edges) {
  return BipartiteGraph(numbered('T', num_treated), numbered('C', num_control),
                        std::move(edges));
}

std::span<const Edge> BipartiteGraph::edges_of(Index treated) const {
  if (row_offsets_.empty()) return {};
  return std::span<const Edge>(edges_).subspan(
      row_offsets_[treated], row_offsets_[treated + 1] - row_offsets_[treated]);
}

std::optional<double> BipartiteGraph::cost(Index treated,
                                           Index control) const {
  if (treated >= num_treated()) return std::nullopt;
  const auto row = edges_of(treated);
  auto it = std::lower_bound(
      row.begin(), row.end(), control,
      [](const Edge& e, Index c) { return e.control < c; });
  if (it == row.end() || it->control != control) return std::nullopt;
  return it->cost;
}

double BipartiteGraph::max_cost() const {
  double m = 0.0;
  for (const auto& e : edges_) m = std::max(m, e.cost);
  return m;
}

bool BipartiteGraph::has_integral_costs() const {
  return std::all_of(edges_.begin(), edges_.end(), [](const Edge& e) {
    return e.cost == std::floor(e.cost);
  });
}

BipartiteGraph build_graph_from_edges(std::vector<std::string> treated_ids,
                                      std::vector<std::string> control_ids,
                                      std::span<const EdgeTriple> triples) {
  require_distinct(treated_ids, "treated");
  require_distinct(control_ids, "control");
  const auto t_index = index_of(treated_ids);
  const auto c_index = index_of(control_ids);
  std::vector<Edge> edges;
  edges.reserve(triples.size());
  for (const auto& t : triples) {
    auto ti = t_index.find(t.treated_id);
    if (ti == t_index.end()) {
      throw InvalidInput("unknown treated id '" + t.treated_id + "'");
    }
    auto ci = c_index.find(t.control_id);
    if (ci == c_index.end()) {
      throw InvalidInput("unknown control id '" + t.control_id + "'");
    }
    edges.push_back({ti->second, ci->second, t.cost});
  }
  return BipartiteGraph(std::move(treated_ids), std::move(control_ids),
                        std::move(edges));
}

CostMatrix to_cost_matrix(const BipartiteGraph& graph) {
  CostMatrix m;
  const double sentinel = graph.num_edges() == 0 ? 1.0 : graph.max_cost() + 1.0;
  m.sentinel = sentinel;
  m.values = DenseMatrix<double>(graph.num_treated(), graph.num_control(),
                                 sentinel);
  m.allowed =
      DenseMatrix<std::uint8_t>(graph.num_treated(), graph.num_control(), 0);
  for (const auto& e : graph.edges()) {
    m.values(e.treated, e.control) = e.cost;
    m.allowed(e.treated, e.control) = 1;
  }
  return m;
}

AdjacencyList to_adjacency_list(const BipartiteGraph& graph) {
  AdjacencyList adj;
  adj.neighbors.resize(graph.num_treated());
  adj.costs.resize(graph.num_treated());
  for (Index i = 0; i < graph.num_treated(); ++i) {
    const auto row = graph.edges_of(i);
    adj.neighbors[i].reserve(row.size());
    adj.costs[i].reserve(row.size());
    for (const auto& e : row) {
      adj.neighbors[i].push_back(e.control);
      adj.costs[i].push_back(e.cost);
    }
  }
  return adj;
}

BipartiteGraph graph_from_cost_matrix(const CostMatrix& matrix,
                                      std::vector<std::string> treated_ids,
                                      std::vector<std::string> control_ids) {
  if (treated_ids.size() != matrix.rows() ||
      control_ids.size() != matrix.cols()) {
    throw InvalidInput("id lists do not match cost matrix shape");
  }
  std::vector<Edge> edges;
  for (Index i = 0; i < matrix.rows(); ++i) {
    for (Index j = 0; j < matrix.cols(); ++j) {
      if (matrix.is_allowed(i, j)) edges.push_back({i, j, matrix(i, j)});
    }
  }
  return BipartiteGraph(std::move(treated_ids), std::move(control_ids),
                        std::move(edges));
}

BipartiteGraph graph_from_adjacency_list(const AdjacencyList& adjacency,
                                         std::vector<std::string> treated_ids,
                                         std::vector<std::string> control_ids) {
  if (adjacency.neighbors.size() != treated_ids.size() ||
      adjacency.costs.size() != treated_ids.size()) {
    throw InvalidInput("adjacency list does not match treated id count");
  }
  std::vector<Edge> edges;
  edges.reserve(adjacency.edge_count());
  for (Index i = 0; i < adjacency.neighbors.size(); ++i) {
    const auto& nbrs = adjacency.neighbors[i];
    const auto& costs = adjacency.costs[i];
    if (nbrs.size() != costs.size()) {
      throw InvalidInput("adjacency list row " + std::to_string(i) +
                         ": neighbour and cost vectors differ in length");
    }
    for (std::size_t l = 0; l < nbrs.size(); ++l) {
      edges.push_back({i, nbrs[l], costs[l]});
    }
  }
  return BipartiteGraph(std::move(treated_ids), std::move(control_ids),
                        std::move(edges));
}

void Matching::sort() { std::sort(pairs.begin(), pairs.end()); }

std::vector<Violation> validate_matching(const BipartiteGraph& graph,
                                         const Matching& matching) {
  using Kind = Violation::Kind;
  std::vector<Violation> out;
  if (matching.ratio == 0) {
    out.push_back({Kind::kBadRatio, 0, 0, "ratio k must be positive"});
    return out;
  }
  std::vector<std::size_t> treated_uses(graph.num_treated(), 0);
  std::vector<std::size_t> control_uses(graph.num_control(), 0);
  std::vector<Pair> sorted = matching.pairs;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const auto [i, j] = sorted[k];
    const std::string where =
        "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
    if (i >= graph.num_treated()) {
      out.push_back({Kind::kTreatedOutOfRange, i, j,
                     "pair " + where + ": treated index out of range"});
      continue;
    }
    if (j >= graph.num_control()) {
      out.push_back({Kind::kControlOutOfRange, i, j,
                     "pair " + where + ": control index out of range"});
      continue;
    }
    if (k > 0 && sorted[k - 1] == sorted[k]) {
      out.push_back({Kind::kDuplicatePair, i, j,
                     "pair " + where + " listed more than once"});
    }
    if (!graph.has_edge(i, j)) {
      out.push_back({Kind::kNotAnEdge, i, j, "pair " + where + " is not an edge"});
    }
    if (++treated_uses[i] == matching.ratio + 1) {
      out.push_back({Kind::kTreatedOverused, i, j,
                     "treated " + graph.treated_ids()[i] + " appears in more than " +
                         std::to_string(matching.ratio) + " pairs"});
    }
    if (matching.mode == Replacement::kWithout && ++control_uses[j] == 2) {
      out.push_back({Kind::kControlReused, i, j,
                     "control " + graph.control_ids()[j] +
                         " used more than once without replacement"});
    }
  }
  return out;
}

double total_cost(const BipartiteGraph& graph, const Matching& matching) {
  double sum = 0.0;
  for (const auto& p : matching.pairs) {
    auto c = graph.cost(p.treated, p.control);
    if (!c) throw InvalidInput("matching contains a non-edge pair");
    sum += *c;
  }
  return sum;
}

}  // namespace matchforge
