#include "matchforge/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

#include "matchforge/error.hpp"
#include "matchforge/flow_maxcard.hpp"
#include "matchforge/flow_mincost.hpp"
#include "matchforge/graph_transforms.hpp"
#include "matchforge/hungarian.hpp"

namespace matchforge {

namespace {

// Fills the derived fields of `r` from its matching.
void finish(const BipartiteGraph& graph, MatchResult& r) {
  r.matching.sort();
  r.cardinality = r.matching.size();
  r.pair_costs.clear();
  r.total_cost = 0.0;
  std::vector<bool> t_used(graph.num_treated(), false);
  std::vector<bool> c_used(graph.num_control(), false);
  for (const auto& p : r.matching.pairs) {
    const double c = *graph.cost(p.treated, p.control);
    r.pair_costs.push_back(c);
    r.total_cost += c;
    t_used[p.treated] = true;
    c_used[p.control] = true;
  }
  r.unmatched_treated.clear();
  r.unmatched_control.clear();
  for (Index i = 0; i < graph.num_treated(); ++i) {
    if (!t_used[i]) r.unmatched_treated.push_back(i);
  }
  for (Index j = 0; j < graph.num_control(); ++j) {
    if (!c_used[j]) r.unmatched_control.push_back(j);
  }
}

double gap_bound(std::size_t pairs, int digits, bool exact) {
  return exact ? 0.0 : static_cast<double>(pairs) * std::pow(10.0, -digits);
}

MatchResult hungarian_match(const BipartiteGraph& graph, int digits) {
  const bool transpose = graph.num_treated() > graph.num_control();
  CostMatrix costs = to_cost_matrix(graph);
  if (transpose) {
    CostMatrix t;
    t.sentinel = costs.sentinel;
    t.values = DenseMatrix<double>(costs.cols(), costs.rows());
    t.allowed = DenseMatrix<std::uint8_t>(costs.cols(), costs.rows());
    for (std::size_t i = 0; i < costs.rows(); ++i) {
      for (std::size_t j = 0; j < costs.cols(); ++j) {
        t.values(j, i) = costs.values(i, j);
        t.allowed(j, i) = costs.allowed(i, j);
      }
    }
    costs = std::move(t);
  }
  HungarianOptions options;
  options.digits = digits;
  LuapResult luap = solve_luap(costs, options);
  MatchResult r;
  for (const auto& p : luap.matching.pairs) {
    r.matching.pairs.push_back(transpose ? Pair{p.control, p.treated} : p);
  }
  r.trace.iterations = luap.adjustments;
  finish(graph, r);
  bool exact = graph.has_integral_costs();
  r.trace.optimality_gap_bound = gap_bound(r.cardinality, digits, exact);
  return r;
}

MatchResult greedy_result(const BipartiteGraph& graph,
                          const GreedyConfig& config) {
  GreedyResult g = greedy_match(graph, config);
  MatchResult r;
  r.matching = std::move(g.matching);
  r.trace.iterations = g.steps.size();
  finish(graph, r);
  return r;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double smd(double diff, double sd) {
  if (diff == 0.0) return 0.0;
  return diff / sd;  // +-inf when the pooled sd is zero
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kGreedy:
      return "greedy";
    case Method::kHungarian:
      return "hungarian";
    case Method::kOptimalFlow:
      return "optimal";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "greedy") return Method::kGreedy;
  if (name == "hungarian") return Method::kHungarian;
  if (name == "optimal" || name == "optimal-flow") return Method::kOptimalFlow;
  throw InvalidInput("unknown method '" + std::string(name) + "'");
}

void MatchRequest::validate() const {
  if ((method == Method::kGreedy) != greedy.has_value()) {
    throw InvalidInput("greedy configuration is required exactly for the greedy method");
  }
  if (greedy) greedy->validate();
  if (caliper) CaliperSpec{*caliper};
  if (digits < 0 || digits > 15) throw InvalidInput("digits must be in [0, 15]");
}

bool same_result(const MatchResult& a, const MatchResult& b) {
  return a.matching == b.matching && a.cardinality == b.cardinality &&
         a.total_cost == b.total_cost && a.pair_costs == b.pair_costs &&
         a.unmatched_treated == b.unmatched_treated &&
         a.unmatched_control == b.unmatched_control && a.balance == b.balance &&
         a.trace.iterations == b.trace.iterations &&
         a.trace.augmentations == b.trace.augmentations &&
         a.trace.cycles_canceled == b.trace.cycles_canceled &&
         a.trace.residual_scans == b.trace.residual_scans &&
         a.trace.optimality_gap_bound == b.trace.optimality_gap_bound;
}

MatchResult optimal_match(const BipartiteGraph& graph, int digits) {
  const IntegerizedGraph scaled = integerize(graph, digits);
  const MaxCardResult maxcard = max_cardinality(scaled.graph);
  const MinCostResult mincost =
      min_cost_matching(scaled.graph, maxcard.cardinality);
  MatchResult r;
  r.matching = mincost.matching;
  r.trace.augmentations = mincost.augmentations;
  r.trace.cycles_canceled = mincost.cycles_canceled;
  r.trace.residual_scans = mincost.scans;
  finish(graph, r);
  r.trace.optimality_gap_bound = gap_bound(r.cardinality, digits, scaled.exact);
  return r;
}

MatchResult run_match(const BipartiteGraph& graph, const MatchRequest& request) {
  request.validate();
  const auto start = std::chrono::steady_clock::now();
  std::optional<BipartiteGraph> calipered;
  if (request.caliper) calipered = apply_caliper(graph, CaliperSpec{*request.caliper});
  const BipartiteGraph& g = calipered ? *calipered : graph;
  MatchResult r;
  switch (request.method) {
    case Method::kGreedy:
      r = greedy_result(g, *request.greedy);
      break;
    case Method::kHungarian:
      r = hungarian_match(g, request.digits);
      break;
    case Method::kOptimalFlow:
      r = optimal_match(g, request.digits);
      break;
  }
  r.trace.wall_seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  return r;
}

UnitSplit split_units(std::span<const Unit> units) {
  validate_units(units);
  UnitSplit s;
  for (const auto& u : units) {
    (u.treatment == 1 ? s.treated : s.controls).push_back(u);
  }
  return s;
}

MatchResult run_match(std::span<const Unit> units, const MetricSpec& metric,
                      const MatchRequest& request, unsigned threads) {
  const UnitSplit split = split_units(units);
  const BipartiteGraph graph =
      complete_graph(split.treated, split.controls, metric, threads);
  MatchResult r = run_match(graph, request);
  if (!units.empty() && !units.front().covariates.empty()) {
    r.balance = balance_report(split.treated, split.controls, r.matching);
  }
  return r;
}

OracleResult brute_force_oracle(const BipartiteGraph& graph, std::size_t m) {
  if (graph.num_edges() > kOracleMaxEdges &&
      std::min(graph.num_treated(), graph.num_control()) > kOracleMaxSide) {
    throw LimitExceeded("oracle guard: instance has " +
                        std::to_string(graph.num_edges()) + " edges and " +
                        std::to_string(graph.num_treated()) + " x " +
                        std::to_string(graph.num_control()) +
                        " units; limit is " + std::to_string(kOracleMaxEdges) +
                        " edges or min side " + std::to_string(kOracleMaxSide));
  }
  OracleResult best;
  if (m == 0) return best;

  // Enumerate over the smaller side; ties on cost are settled by comparing
  // the sorted (treated, control) pair lists.
  const bool by_treated = graph.num_treated() <= graph.num_control();
  const std::size_t outer = by_treated ? graph.num_treated() : graph.num_control();
  const std::size_t inner = by_treated ? graph.num_control() : graph.num_treated();
  std::vector<std::vector<std::pair<Index, double>>> options(outer);
  for (const auto& e : graph.edges()) {
    if (by_treated) {
      options[e.treated].push_back({e.control, e.cost});
    } else {
      options[e.control].push_back({e.treated, e.cost});
    }
  }
  for (auto& o : options) std::sort(o.begin(), o.end());

  bool found = false;
  std::vector<Pair> current;
  std::vector<bool> used(inner, false);

  auto sorted_pairs = [](std::vector<Pair> p) {
    std::sort(p.begin(), p.end());
    return p;
  };
  auto visit = [&](auto&& self, std::size_t u, double cost) -> void {
    if (found && cost > best.cost) return;
    if (current.size() == m) {
      std::vector<Pair> candidate = sorted_pairs(current);
      if (!found || cost < best.cost ||
          (cost == best.cost && candidate < best.matching.pairs)) {
        found = true;
        best.cost = cost;
        best.matching.pairs = std::move(candidate);
      }
      return;
    }
    if (outer - u < m - current.size()) return;
    for (const auto& [v, w] : options[u]) {
      if (used[v]) continue;
      used[v] = true;
      current.push_back(by_treated ? Pair{u, v} : Pair{v, u});
      self(self, u + 1, cost + w);
      current.pop_back();
      used[v] = false;
    }
    self(self, u + 1, cost);
  };
  visit(visit, 0, 0.0);
  if (!found) {
    throw Infeasible("no matching of cardinality " + std::to_string(m) + " exists");
  }
  return best;
}

BalanceReport balance_report(std::span<const Unit> treated,
                             std::span<const Unit> controls,
                             const Matching& matching) {
  BalanceReport report;
  report.treated_count = treated.size();
  report.control_count = controls.size();
  report.matched_pairs = matching.size();
  std::size_t p = 0;
  if (!treated.empty()) {
    p = treated.front().covariates.size();
  } else if (!controls.empty()) {
    p = controls.front().covariates.size();
  }
  for (const auto& pr : matching.pairs) {
    if (pr.treated >= treated.size() || pr.control >= controls.size()) {
      throw InvalidInput("matched index does not resolve to a unit");
    }
  }
  // Post-match treated mean counts each matched treated unit once; controls
  // are counted once per pair, so reuse under replacement weighs in.
  std::vector<bool> t_matched(treated.size(), false);
  for (const auto& pr : matching.pairs) t_matched[pr.treated] = true;

  for (std::size_t k = 0; k < p; ++k) {
    std::vector<double> xt, xc, mt, mc;
    for (const auto& u : treated) xt.push_back(u.covariates.at(k));
    for (const auto& u : controls) xc.push_back(u.covariates.at(k));
    for (Index i = 0; i < treated.size(); ++i) {
      if (t_matched[i]) mt.push_back(treated[i].covariates[k]);
    }
    for (const auto& pr : matching.pairs) mc.push_back(controls[pr.control].covariates[k]);

    CovariateBalance b;
    b.name = "x" + std::to_string(k + 1);
    b.treated_mean = mean_of(xt);
    b.control_mean = mean_of(xc);
    b.pooled_sd = std::sqrt((sample_variance(xt) + sample_variance(xc)) / 2.0);
    b.smd_before = smd(b.treated_mean - b.control_mean, b.pooled_sd);
    if (!matching.pairs.empty()) {
      b.matched_treated_mean = mean_of(mt);
      b.matched_control_mean = mean_of(mc);
      b.smd_after = smd(*b.matched_treated_mean - *b.matched_control_mean, b.pooled_sd);
    }
    report.covariates.push_back(std::move(b));
  }
  return report;
}

BalanceReport balance_report(
    std::span<const Unit> units,
    std::span<const std::pair<std::string, std::string>> pairs) {
  const UnitSplit split = split_units(units);
  std::unordered_map<std::string, Index> t_index, c_index;
  for (Index i = 0; i < split.treated.size(); ++i) t_index[split.treated[i].id] = i;
  for (Index j = 0; j < split.controls.size(); ++j) c_index[split.controls[j].id] = j;
  Matching m;
  for (const auto& [t, c] : pairs) {
    auto ti = t_index.find(t);
    if (ti == t_index.end()) throw InvalidInput("unknown treated id '" + t + "'");
    auto ci = c_index.find(c);
    if (ci == c_index.end()) throw InvalidInput("unknown control id '" + c + "'");
    m.pairs.push_back({ti->second, ci->second});
  }
  return balance_report(split.treated, split.controls, m);
}

}  // namespace matchforge
