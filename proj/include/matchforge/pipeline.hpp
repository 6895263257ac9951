#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "matchforge/data_model.hpp"
#include "matchforge/dissimilarity.hpp"
#include "matchforge/greedy.hpp"

namespace matchforge {

enum class Method { kGreedy, kHungarian, kOptimalFlow };

std::string_view to_string(Method method);
// Accepts "greedy", "hungarian", "optimal" and "optimal-flow".
Method parse_method(std::string_view name);

struct MatchRequest {
  Method method = Method::kOptimalFlow;
  std::optional<GreedyConfig> greedy;  // present iff method == kGreedy
  std::optional<double> caliper;
  int digits = kDefaultDigits;

  void validate() const;
};

struct SolverTrace {
  std::size_t iterations = 0;  // greedy steps or Hungarian adjustments
  std::size_t augmentations = 0;
  std::size_t cycles_canceled = 0;
  std::size_t residual_scans = 0;
  // Distance of the reported cost from the true optimum caused by
  // integerization; nullopt for greedy.
  std::optional<double> optimality_gap_bound;
  double wall_seconds = 0.0;  // excluded from equality
};

struct CovariateBalance {
  std::string name;
  double treated_mean = 0.0;
  double control_mean = 0.0;  // all controls, before matching
  double pooled_sd = 0.0;     // sqrt((s_T^2 + s_C^2) / 2), before matching
  double smd_before = 0.0;
  std::optional<double> matched_treated_mean;
  std::optional<double> matched_control_mean;
  std::optional<double> smd_after;

  friend bool operator==(const CovariateBalance&,
                         const CovariateBalance&) = default;
};

struct BalanceReport {
  std::size_t treated_count = 0;
  std::size_t control_count = 0;
  std::size_t matched_pairs = 0;
  std::vector<CovariateBalance> covariates;

  friend bool operator==(const BalanceReport&, const BalanceReport&) = default;
};

struct MatchResult {
  Matching matching;  // sorted by (treated, control) index
  std::size_t cardinality = 0;
  double total_cost = 0.0;  // original cost scale
  std::vector<double> pair_costs;
  std::vector<Index> unmatched_treated;
  std::vector<Index> unmatched_control;
  std::optional<BalanceReport> balance;
  SolverTrace trace;
};

// Equal in every field except wall time.
bool same_result(const MatchResult& a, const MatchResult& b);

// Maximum cardinality first, then minimum cost at that cardinality on costs
// integerized with `digits`.
MatchResult optimal_match(const BipartiteGraph& graph,
                          int digits = kDefaultDigits);

// Applies the caliper, then dispatches on the method.
MatchResult run_match(const BipartiteGraph& graph, const MatchRequest& request);

// Units split by treatment flag, in input order.
struct UnitSplit {
  std::vector<Unit> treated;
  std::vector<Unit> controls;
};
UnitSplit split_units(std::span<const Unit> units);

// Builds the complete graph under `metric`, runs the request, and attaches a
// balance report. Graph indices follow the order of `split_units`.
MatchResult run_match(std::span<const Unit> units, const MetricSpec& metric,
                      const MatchRequest& request, unsigned threads = 1);

struct OracleResult {
  double cost = 0.0;
  Matching matching;
};

inline constexpr std::size_t kOracleMaxEdges = 25;
inline constexpr std::size_t kOracleMaxSide = 8;

// Exhaustive search over matchings of cardinality exactly m; returns the
// lexicographically least optimal one. Throws LimitExceeded outside the
// size guard and Infeasible if no matching of size m exists.
OracleResult brute_force_oracle(const BipartiteGraph& graph, std::size_t m);

BalanceReport balance_report(std::span<const Unit> treated,
                             std::span<const Unit> controls,
                             const Matching& matching);
// Id-based form: pairs are (treated id, control id). Throws InvalidInput on
// an unknown id.
BalanceReport balance_report(
    std::span<const Unit> units,
    std::span<const std::pair<std::string, std::string>> pairs);

}  // namespace matchforge
