#include "matchforge/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <random>

#include "matchforge/dissimilarity.hpp"
#include "matchforge/error.hpp"
#include "matchforge/graph_transforms.hpp"

namespace matchforge::bench {

namespace {

std::size_t parse_size(std::string_view s, std::string_view text) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
    throw InvalidInput("bad bench case '" + std::string(text) +
                       "': expected N:DEGREE or N:complete");
  }
  return v;
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

BenchCase parse_case(std::string_view text) {
  const auto colon = text.find(':');
  BenchCase c;
  c.n = parse_size(text.substr(0, colon), text);
  if (colon == std::string_view::npos) return c;
  const auto rest = text.substr(colon + 1);
  if (rest != "complete") c.degree = parse_size(rest, text);
  return c;
}

std::string to_string(const BenchCase& c) {
  return std::to_string(c.n) + ":" +
         (c.degree ? std::to_string(*c.degree) : std::string("complete"));
}

BenchInstance make_instance(const BenchCase& c, std::size_t dims,
                            std::uint64_t seed) {
  if (dims == 0) throw InvalidInput("bench needs at least one dimension");
  std::mt19937_64 rng(seed);
  std::vector<Unit> treated(c.n), controls(c.n);
  auto fill = [&](std::vector<Unit>& units, const char* prefix, int flag) {
    for (std::size_t i = 0; i < units.size(); ++i) {
      units[i].id = prefix + std::to_string(i + 1);
      units[i].treatment = flag;
      units[i].covariates.resize(dims);
      for (auto& x : units[i].covariates) x = unit_uniform(rng);
    }
  };
  fill(treated, "T", 1);
  fill(controls, "C", 0);
  const MetricSpec metric = MetricSpec::euclidean(dims);
  BipartiteGraph full = complete_graph(treated, controls, metric);
  if (!c.degree || *c.degree >= c.n) return {std::move(full), std::nullopt};

  std::vector<double> costs;
  costs.reserve(full.num_edges());
  for (const auto& e : full.edges()) costs.push_back(e.cost);
  const std::size_t rank = *c.degree * c.n - 1;
  std::nth_element(costs.begin(), costs.begin() + static_cast<std::ptrdiff_t>(rank),
                   costs.end());
  const double omega = costs[rank];
  return {apply_caliper(full, CaliperSpec(omega)), omega};
}

BenchReport run_case(const BenchCase& c, std::size_t dims, std::uint64_t seed,
                     Method method) {
  using Clock = std::chrono::steady_clock;
  BenchReport r;
  r.bench_case = c;
  auto t0 = Clock::now();
  BenchInstance inst = make_instance(c, dims, seed);
  auto t1 = Clock::now();
  MatchRequest req;
  req.method = method;
  if (method == Method::kGreedy) req.greedy = GreedyConfig{};
  const MatchResult res = run_match(inst.graph, req);
  auto t2 = Clock::now();
  r.edges = inst.graph.num_edges();
  r.caliper = inst.caliper;
  r.cardinality = res.cardinality;
  r.total_cost = res.total_cost;
  r.cycles_canceled = res.trace.cycles_canceled;
  r.build_seconds = std::chrono::duration<double>(t1 - t0).count();
  r.solve_seconds = std::chrono::duration<double>(t2 - t1).count();
  return r;
}

}  // namespace matchforge::bench
