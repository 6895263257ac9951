#pragma once

#include <span>
#include <vector>

#include "matchforge/data_model.hpp"

namespace matchforge {

struct CaliperSpec {
  double omega = 0.0;

  // Throws InvalidInput unless omega >= 0 (infinity allowed).
  explicit CaliperSpec(double omega);
};

// Keeps edges with cost <= omega. Isolated nodes stay in the graph.
BipartiteGraph apply_caliper(const BipartiteGraph& graph, CaliperSpec caliper);

// LUAP -> LAP reduction. Rows [0, real_rows) are the original treated units,
// the remaining rows are dummies. Dummy rows carry `dummy_cost` = (max allowed
// real cost) + 1. Forbidden real cells carry real_rows * max + 1, which is the
// same value when there is one real row; an optimal LAP solution then uses as
// few forbidden cells as possible. `allowed` records the genuine edges.
struct PaddedProblem {
  std::size_t side = 0;
  std::size_t real_rows = 0;
  double dummy_cost = 1.0;
  double forbidden_cost = 1.0;
  DenseMatrix<double> costs;          // side x side
  DenseMatrix<std::uint8_t> allowed;  // real_rows x side

  std::size_t dummy_rows() const { return side - real_rows; }
  bool is_dummy(Index row) const { return row >= real_rows; }
};

// Requires rows <= cols; throws InvalidInput otherwise.
PaddedProblem pad_with_dummies(const CostMatrix& matrix);

struct UnpaddedAssignment {
  Matching matching;                  // only genuine edges
  std::vector<Index> unmatched_treated;  // real rows left without an edge
};

// `assignment[row]` is the column given to each padded row. Pairs touching a
// dummy row are dropped; real rows placed on a forbidden cell are reported
// unmatched.
UnpaddedAssignment unpad(const PaddedProblem& problem,
                         std::span<const Index> assignment);

}  // namespace matchforge
