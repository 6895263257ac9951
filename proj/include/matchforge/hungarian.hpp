#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "matchforge/data_model.hpp"
#include "matchforge/dissimilarity.hpp"

namespace matchforge {

// Working matrix of the matrix-reduction Hungarian method together with the
// current line cover of its zeros.
struct ReducedMatrix {
  DenseMatrix<std::int64_t> entries;
  std::vector<bool> covered_rows;
  std::vector<bool> covered_cols;
  std::size_t lines = 0;

  std::size_t size() const { return entries.rows; }
};

// Steps 2-3: subtract row minima, then column minima, and cover the zeros.
// Throws InvalidInput for a non-square or negative matrix.
ReducedMatrix reduce_rows_then_cols(const DenseMatrix<std::int64_t>& costs);

struct LineCover {
  std::vector<bool> rows;
  std::vector<bool> cols;
  std::size_t lines = 0;
};

// Minimum set of row/column lines covering every zero (nonzero `zeros`
// entry), from a maximum matching on the zero pattern and Konig's theorem.
LineCover min_line_cover(const DenseMatrix<std::uint8_t>& zeros);
LineCover min_line_cover(const DenseMatrix<std::int64_t>& entries);

// Step 6 with the cover stored in `m`: subtract the smallest uncovered entry
// from every uncovered cell and add it to every doubly covered cell. Throws
// std::logic_error when the cover already has `size()` lines.
ReducedMatrix adjust_uncovered(ReducedMatrix m);

struct HungarianOptions {
  int digits = kDefaultDigits;  // used only when costs are not integral
  // Called after each Step-6 adjustment with the new working matrix.
  std::function<void(const ReducedMatrix&)> on_adjust;
};

struct HungarianResult {
  std::vector<Index> assignment;  // row -> column
  Matching matching;
  double total_cost = 0.0;  // under the original costs
  std::size_t adjustments = 0;
};

HungarianResult hungarian_solve(const DenseMatrix<std::int64_t>& costs,
                                const HungarianOptions& options = {});
// Float costs are integerized with `options.digits` unless already integral.
HungarianResult hungarian_solve(const DenseMatrix<double>& costs,
                                const HungarianOptions& options = {});

struct LuapResult {
  Matching matching;
  std::vector<Index> unmatched_treated;
  double total_cost = 0.0;
  std::size_t adjustments = 0;
};

// Rectangular problem with N_T <= N_C and an edge mask: pad, solve, unpad.
// The result has maximum cardinality, then minimum cost.
LuapResult solve_luap(const CostMatrix& costs,
                      const HungarianOptions& options = {});

}  // namespace matchforge
