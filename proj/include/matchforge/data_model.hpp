#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace matchforge {

// Solvers work on contiguous indices; string ids only matter at I/O edges.
using Index = std::size_t;

struct Unit {
  std::string id;
  int treatment = 0;  // 1 = treated, 0 = control
  std::vector<double> covariates;
  std::optional<double> score;
  std::optional<double> response;  // carried through, never read by solvers
};

// Throws InvalidInput if treatment flags are not 0/1 or covariate lengths
// differ. Returns the common covariate dimension (0 for an empty set).
std::size_t validate_units(std::span<const Unit> units);

struct Edge {
  Index treated = 0;
  Index control = 0;
  double cost = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct EdgeTriple {
  std::string treated_id;
  std::string control_id;
  double cost = 0.0;
};

// Row-major dense matrix.
template <class T>
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, T fill = T{})
      : rows(r), cols(c), data(r * c, fill) {}

  T& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const T& operator()(std::size_t i, std::size_t j) const {
    return data[i * cols + j];
  }
  bool square() const { return rows == cols; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;
};

// N_T x N_C costs. Non-edges hold `sentinel`, which is strictly larger than
// every finite entry; `allowed` is the authoritative edge-presence mask.
struct CostMatrix {
  DenseMatrix<double> values;
  DenseMatrix<std::uint8_t> allowed;
  double sentinel = 1.0;

  std::size_t rows() const { return values.rows; }
  std::size_t cols() const { return values.cols; }
  double operator()(std::size_t i, std::size_t j) const { return values(i, j); }
  bool is_allowed(std::size_t i, std::size_t j) const {
    return allowed(i, j) != 0;
  }

  // Complete matrix: every entry is an edge.
  static CostMatrix dense(DenseMatrix<double> costs);
};

// Per treated node i: control neighbours v_i and parallel costs v_i^w.
struct AdjacencyList {
  std::vector<std::vector<Index>> neighbors;
  std::vector<std::vector<double>> costs;

  std::size_t edge_count() const;
};

class BipartiteGraph {
 public:
  BipartiteGraph() = default;

  // Validates indices, costs and duplicates, then sorts edges by
  // (treated, control). Throws InvalidInput.
  BipartiteGraph(std::vector<std::string> treated_ids,
                 std::vector<std::string> control_ids,
                 std::vector<Edge> edges);

  // Anonymous ids T1..Tn / C1..Cm.
  static BipartiteGraph with_default_ids(std::size_t num_treated,
                                         std::size_t num_control,
                                         std::vector<Edge> edges);

  std::size_t num_treated() const { return treated_ids_.size(); }
  std::size_t num_control() const { return control_ids_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::vector<std::string>& treated_ids() const { return treated_ids_; }
  const std::vector<std::string>& control_ids() const { return control_ids_; }
  std::span<const Edge> edges() const { return edges_; }

  // Edges incident to treated node i, ascending by control index.
  std::span<const Edge> edges_of(Index treated) const;

  std::optional<double> cost(Index treated, Index control) const;
  bool has_edge(Index treated, Index control) const {
    return cost(treated, control).has_value();
  }

  // 0 for an edgeless graph.
  double max_cost() const;
  bool has_integral_costs() const;

  friend bool operator==(const BipartiteGraph&, const BipartiteGraph&) = default;

 private:
  std::vector<std::string> treated_ids_;
  std::vector<std::string> control_ids_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> row_offsets_;  // CSR over edges_, size N_T + 1
};

BipartiteGraph build_graph_from_edges(std::vector<std::string> treated_ids,
                                      std::vector<std::string> control_ids,
                                      std::span<const EdgeTriple> triples);

CostMatrix to_cost_matrix(const BipartiteGraph& graph);
AdjacencyList to_adjacency_list(const BipartiteGraph& graph);

BipartiteGraph graph_from_cost_matrix(const CostMatrix& matrix,
                                      std::vector<std::string> treated_ids,
                                      std::vector<std::string> control_ids);
BipartiteGraph graph_from_adjacency_list(const AdjacencyList& adjacency,
                                         std::vector<std::string> treated_ids,
                                         std::vector<std::string> control_ids);

enum class Replacement { kWithout, kWith };

struct Pair {
  Index treated = 0;
  Index control = 0;

  friend auto operator<=>(const Pair&, const Pair&) = default;
};

struct Matching {
  std::vector<Pair> pairs;
  Replacement mode = Replacement::kWithout;
  std::size_t ratio = 1;  // k in 1:k

  std::size_t size() const { return pairs.size(); }
  void sort();
  friend bool operator==(const Matching&, const Matching&) = default;
};

struct Violation {
  enum class Kind {
    kTreatedOutOfRange,
    kControlOutOfRange,
    kNotAnEdge,
    kDuplicatePair,
    kTreatedOverused,
    kControlReused,
    kBadRatio,
  };
  Kind kind;
  Index treated = 0;
  Index control = 0;
  std::string message;
};

// Empty result means the matching is valid for `graph`.
std::vector<Violation> validate_matching(const BipartiteGraph& graph,
                                         const Matching& matching);

double total_cost(const BipartiteGraph& graph, const Matching& matching);

}  // namespace matchforge
