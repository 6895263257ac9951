#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "matchforge/data_model.hpp"

namespace matchforge {

enum class MetricKind {
  kEuclidean,
  kStandardizedEuclidean,
  kMahalanobis,
  kScoreAbsDiff,
};

std::string_view to_string(MetricKind kind);
// Throws InvalidInput on an unknown name.
MetricKind parse_metric_kind(std::string_view name);

struct MetricSpec {
  MetricKind kind = MetricKind::kEuclidean;
  std::size_t dimension = 0;
  std::vector<double> scales;  // per-coordinate sd, standardized-euclidean
  DenseMatrix<double> inverse_covariance;  // mahalanobis

  static MetricSpec euclidean(std::size_t dimension);
  static MetricSpec score_abs_diff();
  // Uses `covariance` as given (no regularisation). Throws if it is not
  // symmetric positive definite.
  static MetricSpec mahalanobis(const DenseMatrix<double>& covariance);
};

// Statistics are pooled over every unit, with n-1 denominators. For
// mahalanobis, `epsilon` is added to the covariance diagonal before inversion;
// when absent it defaults to 1e-8 times the mean diagonal entry.
MetricSpec fit_metric(std::span<const Unit> units, MetricKind kind,
                      std::optional<double> epsilon = std::nullopt);

double distance(const MetricSpec& metric, const Unit& a, const Unit& b);

// Rows are treated units, columns control units. `threads` = 0 picks the
// hardware concurrency; the result does not depend on it.
CostMatrix pairwise_costs(std::span<const Unit> treated,
                          std::span<const Unit> controls,
                          const MetricSpec& metric, unsigned threads = 1);

// Complete bipartite graph over the two unit sets, ids taken from the units.
BipartiteGraph complete_graph(std::span<const Unit> treated,
                              std::span<const Unit> controls,
                              const MetricSpec& metric, unsigned threads = 1);

inline constexpr int kDefaultDigits = 6;

struct IntegerCostMatrix {
  DenseMatrix<std::int64_t> values;
  DenseMatrix<std::uint8_t> allowed;
  std::int64_t sentinel = 1;
  double scale = 1.0;  // 10^digits
  bool exact = true;   // every scaled entry was already an integer
};

// Largest magnitude a scaled cost may reach.
inline constexpr double kMaxIntegerCost = 9007199254740992.0;  // 2^53

// round(cost * 10^digits), halves away from zero. Throws LimitExceeded on
// overflow and InvalidInput for negative digits.
std::int64_t integerize_value(double cost, int digits);
IntegerCostMatrix integerize(const CostMatrix& costs, int digits);

struct IntegerizedGraph {
  BipartiteGraph graph;  // costs hold integers
  double scale = 1.0;
  bool exact = true;
};
IntegerizedGraph integerize(const BipartiteGraph& graph, int digits);

}  // namespace matchforge
