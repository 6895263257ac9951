#include <doctest.h>

#include <numeric>

#include "matchforge/error.hpp"
#include "matchforge/hungarian.hpp"
#include "test_support.hpp"

using namespace matchforge;

namespace {

DenseMatrix<std::int64_t> mat(std::size_t n, std::vector<std::int64_t> v) {
  DenseMatrix<std::int64_t> m(n, v.size() / n);
  m.data = std::move(v);
  return m;
}

DenseMatrix<std::uint8_t> zeros_of(std::size_t n, std::vector<int> v) {
  DenseMatrix<std::uint8_t> m(n, n);
  for (std::size_t k = 0; k < v.size(); ++k) m.data[k] = static_cast<std::uint8_t>(v[k]);
  return m;
}

// Smallest cover found by trying every subset of lines.
std::size_t brute_min_cover(const DenseMatrix<std::int64_t>& m) {
  const std::size_t n = m.rows;
  std::size_t best = 2 * n;
  for (std::size_t mask = 0; mask < (std::size_t{1} << (2 * n)); ++mask) {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      for (std::size_t j = 0; j < n && ok; ++j) {
        if (m(i, j) == 0 && !(mask >> i & 1) && !(mask >> (n + j) & 1)) ok = false;
      }
    }
    if (ok) best = std::min<std::size_t>(best, static_cast<std::size_t>(__builtin_popcountll(mask)));
  }
  return best;
}

bool covers_all_zeros(const ReducedMatrix& r) {
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (r.entries(i, j) == 0 && !r.covered_rows[i] && !r.covered_cols[j]) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("reduce_rows_then_cols") {
  auto r = reduce_rows_then_cols(mat(3, {4, 1, 3, 2, 0, 5, 3, 2, 2}));
  CHECK(r.entries == mat(3, {2, 0, 2, 1, 0, 5, 0, 0, 0}));
  CHECK(reduce_rows_then_cols(mat(2, {0, 0, 0, 0})).entries == mat(2, {0, 0, 0, 0}));
  CHECK(reduce_rows_then_cols(mat(2, {0, 3, 4, 0})).entries == mat(2, {0, 3, 4, 0}));
  CHECK_THROWS_AS(reduce_rows_then_cols(mat(1, {1, 2})), InvalidInput);
  CHECK_THROWS_AS(reduce_rows_then_cols(mat(1, {-1})), InvalidInput);
}

TEST_CASE("min_line_cover") {
  CHECK(min_line_cover(zeros_of(3, {1, 0, 0, 0, 1, 0, 0, 0, 1})).lines == 3);
  auto c = min_line_cover(zeros_of(3, {1, 1, 1, 1, 0, 0, 1, 0, 0}));
  CHECK(c.lines == 2);
  CHECK(c.rows[0]);
  CHECK(c.cols[0]);
  auto none = min_line_cover(zeros_of(3, {0, 0, 0, 0, 0, 0, 0, 0, 0}));
  CHECK(none.lines == 0);
  CHECK(std::none_of(none.rows.begin(), none.rows.end(), [](bool b) { return b; }));

  testing::Rng rng(51);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + testing::uniform_int(rng, 0, 4);
    auto m = testing::random_square(rng, n, 2);
    auto cover = min_line_cover(m);
    CHECK(cover.lines == brute_min_cover(m));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (m(i, j) == 0) CHECK((cover.rows[i] || cover.cols[j]));
  }
}

TEST_CASE("adjust_uncovered") {
  ReducedMatrix r;
  r.entries = mat(3, {2, 0, 2, 1, 0, 5, 0, 0, 0});
  r.covered_rows = {false, false, true};
  r.covered_cols = {false, true, false};
  r.lines = 2;
  auto a = adjust_uncovered(r);
  CHECK(a.entries == mat(3, {1, 0, 1, 0, 0, 4, 0, 1, 0}));

  ReducedMatrix one;
  one.entries = mat(1, {5});
  one.covered_rows = {false};
  one.covered_cols = {false};
  CHECK(adjust_uncovered(one).entries == mat(1, {0}));

  ReducedMatrix full = r;
  full.lines = 3;
  CHECK_THROWS_AS(adjust_uncovered(full), std::logic_error);
}

TEST_CASE("hungarian_solve examples") {
  auto r = hungarian_solve(mat(3, {4, 1, 3, 2, 0, 5, 3, 2, 2}));
  CHECK(r.assignment == std::vector<Index>{1, 0, 2});
  CHECK(r.total_cost == 5.0);
  CHECK(testing::brute_force_assignment(mat(3, {4, 1, 3, 2, 0, 5, 3, 2, 2})).argmins.size() == 1);

  auto diag = hungarian_solve(mat(3, {0, 4, 5, 6, 0, 7, 8, 9, 0}));
  CHECK(diag.assignment == std::vector<Index>{0, 1, 2});
  CHECK(diag.total_cost == 0.0);

  auto single = hungarian_solve(mat(1, {17}));
  CHECK(single.assignment == std::vector<Index>{0});
  CHECK(single.total_cost == 17.0);

  DenseMatrix<double> f(2, 2);
  f.data = {0.5, 0.25, 0.125, 1.0};
  CHECK(hungarian_solve(f).total_cost == 0.375);
}

TEST_CASE("hungarian mechanics on random matrices") {
  testing::Rng rng(61);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 1 + testing::uniform_int(rng, 0, 6);
    auto w = testing::random_square(rng, n, rep % 3 == 0 ? 5 : 100);
    const auto oracle = testing::brute_force_assignment(w);

    auto reduced = reduce_rows_then_cols(w);
    for (std::size_t i = 0; i < n; ++i) {
      bool row_zero = false, col_zero = false;
      for (std::size_t j = 0; j < n; ++j) {
        row_zero |= reduced.entries(i, j) == 0;
        col_zero |= reduced.entries(j, i) == 0;
      }
      CHECK(row_zero);
      CHECK(col_zero);
    }
    CHECK(covers_all_zeros(reduced));
    if (n <= 5) {
      // Argmins of the reduced matrix are the argmins of the original.
      CHECK(testing::brute_force_assignment(reduced.entries).argmins == oracle.argmins);
    }

    HungarianOptions opts;
    std::int64_t previous_sum = std::accumulate(reduced.entries.data.begin(),
                                                reduced.entries.data.end(), std::int64_t{0});
    std::size_t steps = 0;
    opts.on_adjust = [&](const ReducedMatrix& m) {
      ++steps;
      for (auto x : m.entries.data) CHECK(x >= 0);
      const auto sum = std::accumulate(m.entries.data.begin(), m.entries.data.end(),
                                       std::int64_t{0});
      CHECK(sum < previous_sum);
      previous_sum = sum;
      if (n <= 5) CHECK(testing::brute_force_assignment(m.entries).argmins == oracle.argmins);
    };
    auto r = hungarian_solve(w, opts);
    CHECK(r.total_cost == static_cast<double>(oracle.cost));
    CHECK(r.adjustments == steps);
    CHECK(steps <= n * n);
    CHECK(std::find(oracle.argmins.begin(), oracle.argmins.end(), r.assignment) !=
          oracle.argmins.end());
  }
}

TEST_CASE("solve_luap") {
  SUBCASE("2x3 all allowed") {
    DenseMatrix<double> w(2, 3);
    w.data = {1, 2, 9, 3, 1, 9};
    auto r = solve_luap(CostMatrix::dense(w));
    CHECK(r.matching.pairs == std::vector<Pair>{{0, 0}, {1, 1}});
    CHECK(r.total_cost == 2.0);
  }
  SUBCASE("symmetric tie goes to the first control") {
    DenseMatrix<double> w(1, 2);
    w.data = {7, 7};
    auto r = solve_luap(CostMatrix::dense(w));
    CHECK(r.matching.pairs == std::vector<Pair>{{0, 0}});
    CHECK(r.total_cost == 7.0);
  }
  SUBCASE("treated unit with no allowed edge is unmatched") {
    auto g = BipartiteGraph::with_default_ids(2, 2, {{0, 0, 3}, {0, 1, 4}});
    auto r = solve_luap(to_cost_matrix(g));
    CHECK(r.unmatched_treated == std::vector<Index>{1});
    CHECK(r.matching.pairs == std::vector<Pair>{{0, 0}});
  }
  SUBCASE("maximum cardinality wins over a cheaper single pair") {
    auto g = BipartiteGraph::with_default_ids(2, 2, {{0, 0, 0}, {0, 1, 10}, {1, 0, 10}});
    auto r = solve_luap(to_cost_matrix(g));
    CHECK(r.matching.size() == 2);
    CHECK(r.total_cost == 20.0);
  }
}

TEST_CASE("solve_luap agrees with exhaustive search") {
  testing::Rng rng(71);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t nt = 1 + testing::uniform_int(rng, 0, 4);
    const std::size_t nc = nt + testing::uniform_int(rng, 0, 2);
    auto g = testing::random_graph(rng, nt, nc, 0.3 + 0.7 * testing::uniform_real(rng));
    const auto best = testing::min_cost_by_size(g);
    const std::size_t m = testing::max_matching_size(g);
    auto r = solve_luap(to_cost_matrix(g));
    CHECK(validate_matching(g, r.matching).empty());
    CHECK(r.matching.size() == m);
    CHECK(r.total_cost == *best[m]);
    CHECK(r.matching.size() + r.unmatched_treated.size() == nt);
  }
}
