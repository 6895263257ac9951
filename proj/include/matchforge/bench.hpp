#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "matchforge/data_model.hpp"
#include "matchforge/pipeline.hpp"

namespace matchforge::bench {

// N treated and N control units; `degree` is the target average degree after
// the caliper, nullopt for the complete graph.
struct BenchCase {
  std::size_t n = 0;
  std::optional<std::size_t> degree;
};

// "N:DEGREE" or "N:complete".
BenchCase parse_case(std::string_view text);
std::string to_string(const BenchCase& c);

struct BenchInstance {
  BipartiteGraph graph;
  std::optional<double> caliper;
};

// Covariates uniform on [0,1)^dims from mt19937_64, euclidean costs. For a
// sparse case the caliper is the (degree * N)-th smallest cost.
BenchInstance make_instance(const BenchCase& c, std::size_t dims,
                            std::uint64_t seed);

struct BenchReport {
  BenchCase bench_case;
  std::size_t edges = 0;
  std::optional<double> caliper;
  std::size_t cardinality = 0;
  double total_cost = 0.0;
  std::size_t cycles_canceled = 0;
  double build_seconds = 0.0;
  double solve_seconds = 0.0;
};

BenchReport run_case(const BenchCase& c, std::size_t dims, std::uint64_t seed,
                     Method method = Method::kOptimalFlow);

}  // namespace matchforge::bench
