#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "matchforge/dissimilarity.hpp"
#include "matchforge/error.hpp"
#include "matchforge/pipeline.hpp"

namespace py = pybind11;
using namespace matchforge;

namespace {

using EdgeRow = std::tuple<std::size_t, std::size_t, double>;

BipartiteGraph make_graph(std::vector<std::string> treated_ids,
                          std::vector<std::string> control_ids,
                          const std::vector<EdgeRow>& edges) {
  std::vector<Edge> list;
  list.reserve(edges.size());
  for (const auto& [i, j, c] : edges) list.push_back({i, j, c});
  return BipartiteGraph(std::move(treated_ids), std::move(control_ids),
                        std::move(list));
}

MatchRequest make_request(const std::string& method,
                          std::optional<double> caliper, int digits,
                          std::size_t k, bool replacement,
                          const std::string& order,
                          std::optional<std::uint64_t> seed) {
  MatchRequest req;
  req.method = parse_method(method);
  req.caliper = caliper;
  req.digits = digits;
  if (req.method == Method::kGreedy) {
    GreedyConfig g;
    g.order = parse_greedy_order(order);
    g.seed = seed;
    g.k = k;
    g.replacement = replacement;
    req.greedy = g;
  } else if (k != 1 || replacement || order != "input" || seed) {
    throw InvalidInput("k, replacement, order and seed apply only to method 'greedy'");
  }
  req.validate();
  return req;
}

py::object optional_float(const std::optional<double>& v) {
  return v ? py::object(py::float_(*v)) : py::object(py::none());
}

py::dict result_dict(const BipartiteGraph& g, const MatchResult& r) {
  py::list pairs;
  for (std::size_t k = 0; k < r.matching.pairs.size(); ++k) {
    const Pair& p = r.matching.pairs[k];
    pairs.append(py::make_tuple(g.treated_ids()[p.treated],
                                g.control_ids()[p.control], r.pair_costs[k]));
  }
  py::list ut, uc;
  for (Index i : r.unmatched_treated) ut.append(g.treated_ids()[i]);
  for (Index j : r.unmatched_control) uc.append(g.control_ids()[j]);
  py::dict out;
  out["pairs"] = pairs;
  out["cardinality"] = r.cardinality;
  out["total_cost"] = r.total_cost;
  out["optimality_gap_bound"] = optional_float(r.trace.optimality_gap_bound);
  out["unmatched_treated"] = ut;
  out["unmatched_control"] = uc;
  if (r.balance) {
    py::list cov;
    for (const auto& b : r.balance->covariates) {
      py::dict d;
      d["name"] = b.name;
      d["treated_mean"] = b.treated_mean;
      d["control_mean"] = b.control_mean;
      d["smd_before"] = b.smd_before;
      d["smd_after"] = optional_float(b.smd_after);
      cov.append(d);
    }
    out["balance"] = cov;
  }
  return out;
}

py::dict match_graph(std::vector<std::string> treated_ids,
                     std::vector<std::string> control_ids,
                     const std::vector<EdgeRow>& edges,
                     const std::string& method, std::optional<double> caliper,
                     int digits, std::size_t k, bool replacement,
                     const std::string& order,
                     std::optional<std::uint64_t> seed) {
  const MatchRequest req =
      make_request(method, caliper, digits, k, replacement, order, seed);
  const BipartiteGraph g =
      make_graph(std::move(treated_ids), std::move(control_ids), edges);
  MatchResult r;
  {
    py::gil_scoped_release release;
    r = run_match(g, req);
  }
  return result_dict(g, r);
}

py::dict match_units(const std::vector<std::string>& ids,
                     const std::vector<int>& treat,
                     const std::vector<std::vector<double>>& covariates,
                     const std::string& metric, std::optional<double> epsilon,
                     const std::string& method, std::optional<double> caliper,
                     int digits, std::size_t k, bool replacement,
                     const std::string& order,
                     std::optional<std::uint64_t> seed) {
  if (ids.size() != treat.size() || ids.size() != covariates.size()) {
    throw InvalidInput("ids, treat and covariates must have the same length");
  }
  std::vector<Unit> units(ids.size());
  for (std::size_t u = 0; u < ids.size(); ++u) {
    units[u].id = ids[u];
    units[u].treatment = treat[u];
    units[u].covariates = covariates[u];
  }
  validate_units(units);
  const MetricKind kind = parse_metric_kind(metric);
  if (epsilon && kind != MetricKind::kMahalanobis) {
    throw InvalidInput("epsilon applies only to the mahalanobis metric");
  }
  const MatchRequest req =
      make_request(method, caliper, digits, k, replacement, order, seed);
  MatchResult r;
  UnitSplit split;
  {
    py::gil_scoped_release release;
    const MetricSpec spec = fit_metric(units, kind, epsilon);
    r = run_match(units, spec, req);
    split = split_units(units);
  }
  std::vector<std::string> tids, cids;
  for (const auto& u : split.treated) tids.push_back(u.id);
  for (const auto& u : split.controls) cids.push_back(u.id);
  return result_dict(BipartiteGraph(std::move(tids), std::move(cids), {}), r);
}

py::dict oracle(std::vector<std::string> treated_ids,
                std::vector<std::string> control_ids,
                const std::vector<EdgeRow>& edges,
                std::optional<std::size_t> m) {
  const BipartiteGraph g =
      make_graph(std::move(treated_ids), std::move(control_ids), edges);
  const std::size_t size = m ? *m : optimal_match(g).cardinality;
  const OracleResult r = brute_force_oracle(g, size);
  py::list pairs;
  for (const Pair& p : r.matching.pairs) {
    pairs.append(py::make_tuple(g.treated_ids()[p.treated],
                                g.control_ids()[p.control],
                                *g.cost(p.treated, p.control)));
  }
  py::dict out;
  out["pairs"] = pairs;
  out["cardinality"] = r.matching.size();
  out["total_cost"] = r.cost;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  py::register_exception<InvalidInput>(mod, "InvalidInput", PyExc_ValueError);
  py::register_exception<Infeasible>(mod, "Infeasible", PyExc_ValueError);
  py::register_exception<LimitExceeded>(mod, "LimitExceeded", PyExc_RuntimeError);

  mod.def("match_graph", &match_graph, py::arg("treated_ids"),
          py::arg("control_ids"), py::arg("edges"), py::kw_only(),
          py::arg("method") = "optimal", py::arg("caliper") = py::none(),
          py::arg("digits") = kDefaultDigits, py::arg("k") = 1,
          py::arg("replacement") = false, py::arg("order") = "input",
          py::arg("seed") = py::none(),
          "Match on an explicit edge list of (treated index, control index, cost).");
  mod.def("match_units", &match_units, py::arg("ids"), py::arg("treat"),
          py::arg("covariates"), py::kw_only(),
          py::arg("metric") = "mahalanobis", py::arg("epsilon") = py::none(),
          py::arg("method") = "optimal", py::arg("caliper") = py::none(),
          py::arg("digits") = kDefaultDigits, py::arg("k") = 1,
          py::arg("replacement") = false, py::arg("order") = "input",
          py::arg("seed") = py::none(),
          "Match units on the complete graph under a fitted metric.");
  mod.def("oracle", &oracle, py::arg("treated_ids"), py::arg("control_ids"),
          py::arg("edges"), py::arg("m") = py::none(),
          "Exhaustive minimum-cost matching of size m (default: maximum).");
}
