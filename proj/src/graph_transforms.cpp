#include "matchforge/graph_transforms.hpp"

#include <cmath>
#include <string>

#include "matchforge/error.hpp"

namespace matchforge {

CaliperSpec::CaliperSpec(double omega_) : omega(omega_) {
  if (std::isnan(omega) || omega < 0.0) {
    throw InvalidInput("caliper omega must be >= 0");
  }
}

BipartiteGraph apply_caliper(const BipartiteGraph& graph, CaliperSpec caliper) {
  std::vector<Edge> kept;
  kept.reserve(graph.num_edges());
  for (const auto& e : graph.edges()) {
    if (e.cost <= caliper.omega) kept.push_back(e);
  }
  return BipartiteGraph(graph.treated_ids(), graph.control_ids(),
                        std::move(kept));
}

PaddedProblem pad_with_dummies(const CostMatrix& matrix) {
  const std::size_t rows = matrix.rows();
  const std::size_t cols = matrix.cols();
  if (rows > cols) {
    throw InvalidInput("pad_with_dummies needs N_T <= N_C (got " +
                       std::to_string(rows) + " x " + std::to_string(cols) +
                       "); transpose the roles first");
  }
  double max_allowed = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (matrix.is_allowed(i, j)) max_allowed = std::max(max_allowed, matrix(i, j));
    }
  }
  PaddedProblem p;
  p.side = cols;
  p.real_rows = rows;
  p.dummy_cost = max_allowed + 1.0;
  // Genuine edges on the real rows sum to at most rows * max, so one more
  // forbidden cell always costs more than any choice of genuine edges.
  p.forbidden_cost = std::max(p.dummy_cost, static_cast<double>(rows) * max_allowed + 1.0);
  p.costs = DenseMatrix<double>(cols, cols, p.dummy_cost);
  p.allowed = matrix.allowed;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      p.costs(i, j) = matrix.is_allowed(i, j) ? matrix(i, j) : p.forbidden_cost;
    }
  }
  return p;
}

UnpaddedAssignment unpad(const PaddedProblem& problem,
                         std::span<const Index> assignment) {
  if (assignment.size() != problem.side) {
    throw InvalidInput("assignment length does not match padded problem");
  }
  UnpaddedAssignment out;
  for (Index row = 0; row < problem.real_rows; ++row) {
    const Index col = assignment[row];
    if (col >= problem.side) throw InvalidInput("assignment column out of range");
    if (problem.allowed(row, col)) {
      out.matching.pairs.push_back({row, col});
    } else {
      out.unmatched_treated.push_back(row);
    }
  }
  return out;
}

}  // namespace matchforge
