#pragma once

// Instance generators and reference solvers used only by the tests. The
// reference solvers deliberately share no code with the library.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "matchforge/data_model.hpp"
#include "matchforge/flow_mincost.hpp"

namespace testing {

using matchforge::BipartiteGraph;
using matchforge::DenseMatrix;
using matchforge::Edge;
using matchforge::Index;

using Rng = std::mt19937_64;

// Uniform integer in [lo, hi], by rejection so results do not depend on the
// standard library's distribution implementation.
inline std::uint64_t uniform_int(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  const std::uint64_t span = hi - lo + 1;
  if (span == 0) return rng();
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return lo + x % span;
}

inline double uniform_real(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Random graph; each of the nt*nc pairs is an edge with probability `density`.
// Integer costs in [0, max_cost].
inline BipartiteGraph random_graph(Rng& rng, std::size_t nt, std::size_t nc,
                                   double density, std::uint64_t max_cost = 100) {
  std::vector<Edge> edges;
  for (Index i = 0; i < nt; ++i) {
    for (Index j = 0; j < nc; ++j) {
      if (uniform_real(rng) < density) {
        edges.push_back({i, j, static_cast<double>(uniform_int(rng, 0, max_cost))});
      }
    }
  }
  return BipartiteGraph::with_default_ids(nt, nc, std::move(edges));
}

// Float costs uniform on [0, scale).
inline BipartiteGraph random_float_graph(Rng& rng, std::size_t nt, std::size_t nc,
                                         double density, double scale = 10.0) {
  std::vector<Edge> edges;
  for (Index i = 0; i < nt; ++i) {
    for (Index j = 0; j < nc; ++j) {
      if (uniform_real(rng) < density) edges.push_back({i, j, scale * uniform_real(rng)});
    }
  }
  return BipartiteGraph::with_default_ids(nt, nc, std::move(edges));
}

inline DenseMatrix<std::int64_t> random_square(Rng& rng, std::size_t n,
                                               std::uint64_t max_cost = 100) {
  DenseMatrix<std::int64_t> m(n, n);
  for (auto& x : m.data) x = static_cast<std::int64_t>(uniform_int(rng, 0, max_cost));
  return m;
}

inline BipartiteGraph complete_from(const DenseMatrix<std::int64_t>& w) {
  std::vector<Edge> edges;
  for (Index i = 0; i < w.rows; ++i) {
    for (Index j = 0; j < w.cols; ++j) {
      edges.push_back({i, j, static_cast<double>(w(i, j))});
    }
  }
  return BipartiteGraph::with_default_ids(w.rows, w.cols, std::move(edges));
}

inline BipartiteGraph complete_from(std::vector<std::vector<double>> rows) {
  std::vector<Edge> edges;
  for (Index i = 0; i < rows.size(); ++i) {
    for (Index j = 0; j < rows[i].size(); ++j) edges.push_back({i, j, rows[i][j]});
  }
  return BipartiteGraph::with_default_ids(rows.size(), rows.empty() ? 0 : rows[0].size(),
                                          std::move(edges));
}

// ---- reference solvers ----

// best[k] = minimum total cost over matchings of exactly k pairs, by dynamic
// programming over (treated row, set of used controls). nc must be small.
inline std::vector<std::optional<double>> min_cost_by_size(const BipartiteGraph& g) {
  const std::size_t nt = g.num_treated(), nc = g.num_control();
  const std::size_t masks = std::size_t{1} << nc;
  const std::size_t kmax = std::min(nt, nc);
  using Row = std::vector<std::optional<double>>;
  // layer[mask][k]
  std::vector<Row> layer(masks, Row(kmax + 1));
  layer[0][0] = 0.0;
  for (Index i = 0; i < nt; ++i) {
    std::vector<Row> next = layer;  // treated i left unmatched
    for (std::size_t mask = 0; mask < masks; ++mask) {
      for (std::size_t k = 0; k < kmax; ++k) {
        if (!layer[mask][k]) continue;
        for (Index j = 0; j < nc; ++j) {
          const auto c = g.cost(i, j);
          if (!c || (mask >> j & 1)) continue;
          auto& slot = next[mask | (std::size_t{1} << j)][k + 1];
          const double v = *layer[mask][k] + *c;
          if (!slot || v < *slot) slot = v;
        }
      }
    }
    layer = std::move(next);
  }
  Row best(kmax + 1);
  for (const auto& row : layer) {
    for (std::size_t k = 0; k <= kmax; ++k) {
      if (row[k] && (!best[k] || *row[k] < *best[k])) best[k] = row[k];
    }
  }
  return best;
}

inline std::size_t max_matching_size(const BipartiteGraph& g) {
  const auto best = min_cost_by_size(g);
  std::size_t m = 0;
  for (std::size_t k = 0; k < best.size(); ++k) {
    if (best[k]) m = k;
  }
  return m;
}

// Number of matchings with exactly m pairs whose cost is within tol of the
// minimum. Plain recursion; for tiny graphs only.
inline std::size_t count_optimal(const BipartiteGraph& g, std::size_t m, double optimum,
                                 double tol = 1e-9) {
  std::vector<bool> used(g.num_control(), false);
  std::size_t count = 0;
  auto rec = [&](auto&& self, Index i, std::size_t k, double cost) -> void {
    if (k == m) {
      if (cost <= optimum + tol) ++count;
      return;
    }
    if (i == g.num_treated()) return;
    self(self, i + 1, k, cost);
    for (const auto& e : g.edges_of(i)) {
      if (used[e.control]) continue;
      used[e.control] = true;
      self(self, i + 1, k + 1, cost + e.cost);
      used[e.control] = false;
    }
  };
  rec(rec, 0, 0, 0.0);
  return count;
}

struct PermutationOptimum {
  std::int64_t cost = 0;
  std::vector<std::vector<Index>> argmins;  // every optimal row -> column map
};

inline PermutationOptimum brute_force_assignment(const DenseMatrix<std::int64_t>& w) {
  std::vector<Index> perm(w.rows);
  std::iota(perm.begin(), perm.end(), Index{0});
  PermutationOptimum best;
  best.cost = std::numeric_limits<std::int64_t>::max();
  do {
    std::int64_t c = 0;
    for (Index i = 0; i < w.rows; ++i) c += w(i, perm[i]);
    if (c < best.cost) {
      best.cost = c;
      best.argmins.clear();
    }
    if (c == best.cost) best.argmins.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Floyd-Warshall over the residual edge list; true iff some vertex reaches
// itself at negative cost.
inline bool has_negative_cycle(const matchforge::CostedResidualGraph& g) {
  const std::size_t n = g.num_nodes;
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> d(n * n, kInf);
  for (std::size_t v = 0; v < n; ++v) d[v * n + v] = 0;
  for (const auto& e : g.edges) {
    auto& slot = d[e.from * n + e.to];
    slot = std::min(slot, e.cost);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i * n + k] == kInf) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (d[k * n + j] == kInf) continue;
        d[i * n + j] = std::min(d[i * n + j], d[i * n + k] + d[k * n + j]);
      }
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (d[v * n + v] < 0) return true;
  }
  return false;
}

inline std::string describe(const BipartiteGraph& g) {
  std::ostringstream os;
  os << g.num_treated() << "x" << g.num_control() << " {";
  for (const auto& e : g.edges()) os << " (" << e.treated << "," << e.control << "):" << e.cost;
  os << " }";
  return os.str();
}

}  // namespace testing
