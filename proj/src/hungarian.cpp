#include "matchforge/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "matchforge/error.hpp"
#include "matchforge/graph_transforms.hpp"

namespace matchforge {

namespace {

constexpr Index kNone = std::numeric_limits<Index>::max();

// Maximum matching on the zero pattern of a square matrix. The matching is
// kept between calls: zeros it uses are singly covered, so Step 6 never
// touches them and the next call only has to extend it.
class ZeroMatcher {
 public:
  explicit ZeroMatcher(std::size_t n) : row_match_(n, kNone), col_match_(n, kNone) {}

  // Grows the matching to maximum, then returns the Konig cover derived from
  // the alternating forest of the final (failed) search.
  template <class IsZero>
  LineCover cover(std::size_t n, IsZero is_zero) {
    while (augment_once(n, is_zero)) {
    }
    LineCover c;
    c.rows.assign(n, false);
    c.cols.assign(n, false);
    for (Index r = 0; r < n; ++r) c.rows[r] = !row_seen_[r];
    for (Index j = 0; j < n; ++j) c.cols[j] = col_seen_[j];
    c.lines = matched_;
    return c;
  }

  const std::vector<Index>& row_match() const { return row_match_; }

 private:
  // Multi-source BFS from every free row; rows and columns are explored in
  // ascending order. Applies the first augmenting path found.
  template <class IsZero>
  bool augment_once(std::size_t n, IsZero is_zero) {
    row_seen_.assign(n, false);
    col_seen_.assign(n, false);
    col_parent_.assign(n, kNone);
    queue_.clear();
    for (Index r = 0; r < n; ++r) {
      if (row_match_[r] == kNone) {
        row_seen_[r] = true;
        queue_.push_back(r);
      }
    }
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const Index r = queue_[head];
      for (Index j = 0; j < n; ++j) {
        if (col_seen_[j] || !is_zero(r, j)) continue;
        col_seen_[j] = true;
        col_parent_[j] = r;
        if (col_match_[j] == kNone) {
          flip_path(j);
          return true;
        }
        const Index next = col_match_[j];
        if (!row_seen_[next]) {
          row_seen_[next] = true;
          queue_.push_back(next);
        }
      }
    }
    return false;
  }

  void flip_path(Index col) {
    ++matched_;
    while (col != kNone) {
      const Index r = col_parent_[col];
      const Index previous = row_match_[r];
      row_match_[r] = col;
      col_match_[col] = r;
      col = previous;
    }
  }

  std::vector<Index> row_match_;
  std::vector<Index> col_match_;
  std::vector<bool> row_seen_;
  std::vector<bool> col_seen_;
  std::vector<Index> col_parent_;
  std::vector<Index> queue_;
  std::size_t matched_ = 0;
};

void require_square_non_negative(const DenseMatrix<std::int64_t>& m) {
  if (!m.square()) {
    throw InvalidInput("Hungarian method needs a square matrix (got " +
                       std::to_string(m.rows) + " x " + std::to_string(m.cols) +
                       "); use solve_luap for rectangular problems");
  }
  for (auto v : m.data) {
    if (v < 0) throw InvalidInput("cost matrix entries must be non-negative");
  }
}

}  // namespace

ReducedMatrix reduce_rows_then_cols(const DenseMatrix<std::int64_t>& costs) {
  require_square_non_negative(costs);
  const std::size_t n = costs.rows;
  ReducedMatrix m;
  m.entries = costs;
  m.covered_rows.assign(n, false);
  m.covered_cols.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t lo = m.entries(i, 0);
    for (std::size_t j = 1; j < n; ++j) lo = std::min(lo, m.entries(i, j));
    for (std::size_t j = 0; j < n; ++j) m.entries(i, j) -= lo;
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::int64_t lo = m.entries(0, j);
    for (std::size_t i = 1; i < n; ++i) lo = std::min(lo, m.entries(i, j));
    for (std::size_t i = 0; i < n; ++i) m.entries(i, j) -= lo;
  }
  LineCover c = min_line_cover(m.entries);
  m.covered_rows = std::move(c.rows);
  m.covered_cols = std::move(c.cols);
  m.lines = c.lines;
  return m;
}

LineCover min_line_cover(const DenseMatrix<std::uint8_t>& zeros) {
  if (!zeros.square()) throw InvalidInput("zero pattern must be square");
  ZeroMatcher matcher(zeros.rows);
  return matcher.cover(zeros.rows,
                       [&](Index r, Index c) { return zeros(r, c) != 0; });
}

LineCover min_line_cover(const DenseMatrix<std::int64_t>& entries) {
  if (!entries.square()) throw InvalidInput("matrix must be square");
  ZeroMatcher matcher(entries.rows);
  return matcher.cover(entries.rows,
                       [&](Index r, Index c) { return entries(r, c) == 0; });
}

ReducedMatrix adjust_uncovered(ReducedMatrix m) {
  const std::size_t n = m.size();
  if (m.lines >= n) {
    throw std::logic_error("adjust_uncovered called with a complete cover");
  }
  std::optional<std::int64_t> delta;
  for (std::size_t i = 0; i < n; ++i) {
    if (m.covered_rows[i]) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (m.covered_cols[j]) continue;
      if (!delta || m.entries(i, j) < *delta) delta = m.entries(i, j);
    }
  }
  if (!delta || *delta <= 0) {
    throw std::logic_error("adjust_uncovered: cover leaves a zero uncovered");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const bool r = m.covered_rows[i];
      const bool c = m.covered_cols[j];
      if (!r && !c) {
        m.entries(i, j) -= *delta;
      } else if (r && c) {
        m.entries(i, j) += *delta;
      }
    }
  }
  return m;
}

HungarianResult hungarian_solve(const DenseMatrix<std::int64_t>& costs,
                                const HungarianOptions& options) {
  ReducedMatrix m = reduce_rows_then_cols(costs);
  const std::size_t n = m.size();
  HungarianResult result;
  ZeroMatcher matcher(n);
  for (;;) {
    LineCover c =
        matcher.cover(n, [&](Index r, Index j) { return m.entries(r, j) == 0; });
    m.covered_rows = std::move(c.rows);
    m.covered_cols = std::move(c.cols);
    m.lines = c.lines;
    if (m.lines == n) break;
    m = adjust_uncovered(std::move(m));
    ++result.adjustments;
    if (options.on_adjust) options.on_adjust(m);
  }
  result.assignment = matcher.row_match();
  for (Index r = 0; r < n; ++r) {
    const Index col = result.assignment[r];
    result.matching.pairs.push_back({r, col});
    result.total_cost += static_cast<double>(costs(r, col));
  }
  return result;
}

HungarianResult hungarian_solve(const DenseMatrix<double>& costs,
                                const HungarianOptions& options) {
  if (!costs.square()) {
    throw InvalidInput("Hungarian method needs a square matrix; use solve_luap");
  }
  bool integral = true;
  for (double v : costs.data) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidInput("cost matrix entries must be finite and non-negative");
    }
    if (v != std::floor(v) || v > kMaxIntegerCost) integral = false;
  }
  DenseMatrix<std::int64_t> ints(costs.rows, costs.cols);
  for (std::size_t k = 0; k < costs.data.size(); ++k) {
    ints.data[k] = integral ? static_cast<std::int64_t>(costs.data[k])
                            : integerize_value(costs.data[k], options.digits);
  }
  HungarianResult result = hungarian_solve(ints, options);
  result.total_cost = 0.0;
  for (const auto& p : result.matching.pairs) {
    result.total_cost += costs(p.treated, p.control);
  }
  return result;
}

LuapResult solve_luap(const CostMatrix& costs, const HungarianOptions& options) {
  const PaddedProblem padded = pad_with_dummies(costs);
  const HungarianResult lap = hungarian_solve(padded.costs, options);
  UnpaddedAssignment un = unpad(padded, lap.assignment);
  LuapResult result;
  result.matching = std::move(un.matching);
  result.unmatched_treated = std::move(un.unmatched_treated);
  result.adjustments = lap.adjustments;
  for (const auto& p : result.matching.pairs) {
    result.total_cost += costs(p.treated, p.control);
  }
  return result;
}

}  // namespace matchforge
