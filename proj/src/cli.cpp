#include "matchforge/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "matchforge/bench.hpp"
#include "matchforge/error.hpp"
#include "matchforge/flow_maxcard.hpp"
#include "matchforge/graph_transforms.hpp"
#include "matchforge/io.hpp"
#include "matchforge/pipeline.hpp"

namespace matchforge::cli {

namespace {

using Json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputOptions {
  std::string input;
  std::string input_kind = "units";
  std::optional<std::string> metric;
  std::optional<double> epsilon;
  std::optional<double> caliper;
  int digits = kDefaultDigits;
  std::optional<std::string> out;
  std::optional<std::string> summary;
  std::string format = "csv";
};

struct MatchOptions {
  std::string method = "optimal";
  std::optional<std::size_t> k;
  bool replacement = false;
  std::optional<std::string> order;
  std::optional<std::uint64_t> seed;
};

struct BenchOptions {
  std::vector<std::string> cases;
  std::size_t dims = 2;
  std::uint64_t seed = 1;
  std::string method = "optimal";
  std::string format = "text";
  std::optional<std::string> out;
};

void add_input_options(CLI::App* cmd, InputOptions& o) {
  cmd->add_option("--input", o.input, "input file")->required();
  cmd->add_option("--input-kind", o.input_kind, "units | edge-list")
      ->check(CLI::IsMember({"units", "units-csv", "edge-list", "edge-list-csv"}));
  cmd->add_option("--metric", o.metric,
                  "euclidean | standardized-euclidean | mahalanobis | score-abs-diff")
      ->check(CLI::IsMember(
          {"euclidean", "standardized-euclidean", "mahalanobis", "score-abs-diff"}));
  cmd->add_option("--epsilon", o.epsilon, "mahalanobis ridge")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--caliper", o.caliper, "drop edges costing more than this")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--digits", o.digits, "decimal digits kept when integerizing")
      ->check(CLI::Range(0, 15));
  cmd->add_option("--out", o.out, "pairs output (default stdout)");
  cmd->add_option("--summary", o.summary, "summary json output");
  cmd->add_option("--format", o.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
}

bool units_input(const InputOptions& o) {
  return o.input_kind == "units" || o.input_kind == "units-csv";
}

unsigned thread_count() {
  const char* env = std::getenv("MATCHFORGE_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  unsigned v = 0;
  const char* end = env + std::char_traits<char>::length(env);
  auto [ptr, ec] = std::from_chars(env, end, v);
  if (ec != std::errc() || ptr != end) {
    throw UsageError("MATCHFORGE_THREADS must be a non-negative integer");
  }
  return v;
}

void check_input_usage(const InputOptions& o) {
  if (!units_input(o) && (o.metric || o.epsilon)) {
    throw UsageError("--metric and --epsilon apply only to units input");
  }
  if (o.epsilon && o.metric && *o.metric != "mahalanobis") {
    throw UsageError("--epsilon applies only to the mahalanobis metric");
  }
}

struct LoadedInput {
  BipartiteGraph graph;
  std::optional<UnitSplit> units;
  std::vector<std::string> covariate_names;
};

LoadedInput load(const InputOptions& o, unsigned threads) {
  LoadedInput in;
  if (!units_input(o)) {
    in.graph = io::read_edge_list_csv_file(o.input);
    return in;
  }
  io::UnitTable table = io::read_units_csv_file(o.input);
  const MetricKind kind = parse_metric_kind(o.metric.value_or("mahalanobis"));
  if (kind == MetricKind::kScoreAbsDiff && !table.has_score) {
    throw InvalidInput("metric score-abs-diff needs a 'score' column");
  }
  UnitSplit split = split_units(table.units);
  const MetricSpec metric = fit_metric(table.units, kind, o.epsilon);
  in.graph = complete_graph(split.treated, split.controls, metric, threads);
  in.units = std::move(split);
  in.covariate_names = std::move(table.covariate_names);
  return in;
}

void attach_balance(const LoadedInput& in, MatchResult& r) {
  if (!in.units || in.covariate_names.empty()) return;
  r.balance = balance_report(in.units->treated, in.units->controls, r.matching);
  for (std::size_t k = 0; k < r.balance->covariates.size(); ++k) {
    r.balance->covariates[k].name = in.covariate_names[k];
  }
}

Json input_echo(const std::string& command, const InputOptions& o) {
  Json c;
  c["command"] = command;
  c["input"] = o.input;
  c["input_kind"] = units_input(o) ? "units-csv" : "edge-list-csv";
  if (units_input(o)) {
    c["metric"] = o.metric.value_or("mahalanobis");
    c["epsilon"] = o.epsilon ? Json(*o.epsilon) : Json(nullptr);
  }
  c["caliper"] = o.caliper ? Json(*o.caliper) : Json(nullptr);
  c["digits"] = o.digits;
  c["format"] = o.format;
  return c;
}

template <typename Fn>
void with_output(const std::optional<std::string>& path, std::ostream& fallback,
                 Fn&& fn) {
  if (!path) {
    fn(fallback);
    return;
  }
  std::ofstream f(*path, std::ios::binary);
  if (!f) throw InvalidInput("cannot write '" + *path + "'");
  fn(f);
  f.close();
  if (!f) throw InvalidInput("failed writing '" + *path + "'");
}

void emit(const InputOptions& o, const BipartiteGraph& graph,
          const MatchResult& r, const Json& config, std::ostream& out) {
  const auto rows = io::pair_rows(graph, r);
  with_output(o.out, out, [&](std::ostream& s) {
    if (o.format == "json") {
      io::write_pairs_json(s, rows);
    } else {
      io::write_pairs_csv(s, rows);
    }
  });
  if (o.summary) {
    const Json summary = io::summary_json(graph, r, config);
    with_output(o.summary, out, [&](std::ostream& s) { s << summary.dump(2) << '\n'; });
  }
}

MatchRequest build_request(const InputOptions& o, const MatchOptions& m) {
  MatchRequest req;
  req.method = parse_method(m.method);
  req.caliper = o.caliper;
  req.digits = o.digits;
  if (req.method == Method::kGreedy) {
    GreedyConfig g;
    if (m.order) g.order = parse_greedy_order(*m.order);
    g.seed = m.seed;
    g.k = m.k.value_or(1);
    g.replacement = m.replacement;
    if (g.order == GreedyOrder::kRandom && !g.seed) {
      throw UsageError("--order random requires --seed");
    }
    if (g.order != GreedyOrder::kRandom && g.seed) {
      throw UsageError("--seed applies only to --order random");
    }
    if (g.k == 0) throw UsageError("--k must be at least 1");
    req.greedy = g;
  } else if (m.k || m.replacement || m.order || m.seed) {
    throw UsageError("--k, --replacement, --order and --seed apply only to --method greedy");
  }
  try {
    req.validate();
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
  return req;
}

int cmd_match(const InputOptions& o, const MatchOptions& m, std::ostream& out) {
  check_input_usage(o);
  const MatchRequest req = build_request(o, m);
  const unsigned threads = thread_count();

  const LoadedInput in = load(o, threads);
  MatchResult r = run_match(in.graph, req);
  attach_balance(in, r);

  Json config = input_echo("match", o);
  config["method"] = std::string(to_string(req.method));
  if (req.greedy) {
    config["order"] = std::string(to_string(req.greedy->order));
    config["seed"] = req.greedy->seed ? Json(*req.greedy->seed) : Json(nullptr);
    config["k"] = req.greedy->k;
    config["replacement"] = req.greedy->replacement;
  }
  emit(o, in.graph, r, config, out);
  return kExitOk;
}

int cmd_oracle(const InputOptions& o, std::optional<std::size_t> m_opt,
               std::ostream& out) {
  check_input_usage(o);
  const unsigned threads = thread_count();
  LoadedInput in = load(o, threads);
  if (o.caliper) in.graph = apply_caliper(in.graph, CaliperSpec(*o.caliper));

  const std::size_t m = m_opt ? *m_opt : max_cardinality(in.graph).cardinality;
  const OracleResult best = brute_force_oracle(in.graph, m);

  MatchResult r;
  r.matching = best.matching;
  r.matching.sort();
  r.cardinality = r.matching.size();
  r.total_cost = best.cost;
  std::vector<bool> t_used(in.graph.num_treated()), c_used(in.graph.num_control());
  for (const auto& p : r.matching.pairs) {
    r.pair_costs.push_back(*in.graph.cost(p.treated, p.control));
    t_used[p.treated] = true;
    c_used[p.control] = true;
  }
  for (Index i = 0; i < t_used.size(); ++i) {
    if (!t_used[i]) r.unmatched_treated.push_back(i);
  }
  for (Index j = 0; j < c_used.size(); ++j) {
    if (!c_used[j]) r.unmatched_control.push_back(j);
  }
  r.trace.optimality_gap_bound = 0.0;
  attach_balance(in, r);

  Json config = input_echo("oracle", o);
  config["m"] = m;
  emit(o, in.graph, r, config, out);
  return kExitOk;
}

int cmd_bench(const BenchOptions& b, std::ostream& out) {
  if (b.dims == 0) throw UsageError("--dims must be at least 1");
  std::vector<bench::BenchCase> cases;
  try {
    for (const auto& c : b.cases) cases.push_back(bench::parse_case(c));
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
  if (cases.empty()) {
    cases = {bench::parse_case("2000:10"), bench::parse_case("500:complete")};
  }
  const Method method = parse_method(b.method);

  Json report = Json::array();
  for (const auto& c : cases) {
    const bench::BenchReport r = bench::run_case(c, b.dims, b.seed, method);
    report.push_back({{"case", bench::to_string(c)},
                      {"n", c.n},
                      {"edges", r.edges},
                      {"caliper", r.caliper ? Json(*r.caliper) : Json(nullptr)},
                      {"cardinality", r.cardinality},
                      {"total_cost", r.total_cost},
                      {"cycles_canceled", r.cycles_canceled},
                      {"build_seconds", r.build_seconds},
                      {"solve_seconds", r.solve_seconds}});
  }
  with_output(b.out, out, [&](std::ostream& s) {
    if (b.format == "json") {
      s << report.dump(2) << '\n';
      return;
    }
    for (const auto& row : report) {
      s << "case=" << row["case"].get<std::string>()
        << " edges=" << row["edges"].get<std::size_t>()
        << " cardinality=" << row["cardinality"].get<std::size_t>()
        << " total_cost=" << io::format_double(row["total_cost"].get<double>())
        << " build_s=" << io::format_double(row["build_seconds"].get<double>())
        << " solve_s=" << io::format_double(row["solve_seconds"].get<double>())
        << '\n';
    }
  });
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app("Bipartite matching of treated and control units", "matchforge");
  app.require_subcommand(1);

  InputOptions match_in, oracle_in;
  MatchOptions match_opts;
  std::optional<std::size_t> oracle_m;
  BenchOptions bench_opts;

  auto* match = app.add_subcommand("match", "match treated units to controls");
  add_input_options(match, match_in);
  match->add_option("--method", match_opts.method, "greedy | hungarian | optimal")
      ->check(CLI::IsMember({"greedy", "hungarian", "optimal", "optimal-flow"}));
  match->add_option("--k", match_opts.k, "controls per treated unit (greedy)");
  match->add_flag("--replacement", match_opts.replacement,
                  "allow controls to be reused (greedy)");
  match->add_option("--order", match_opts.order, "input | random | max-cost-first")
      ->check(CLI::IsMember({"input", "random", "max-cost-first"}));
  match->add_option("--seed", match_opts.seed, "seed for --order random");

  auto* oracle = app.add_subcommand("oracle", "exhaustive search on small instances");
  add_input_options(oracle, oracle_in);
  oracle->add_option("--m", oracle_m, "cardinality (default: maximum)");

  auto* bench_cmd = app.add_subcommand("bench", "time seeded random instances");
  bench_cmd->add_option("--case", bench_opts.cases, "N:DEGREE or N:complete (repeatable)");
  bench_cmd->add_option("--dims", bench_opts.dims, "covariate dimension");
  bench_cmd->add_option("--seed", bench_opts.seed, "instance seed");
  bench_cmd->add_option("--method", bench_opts.method, "greedy | hungarian | optimal")
      ->check(CLI::IsMember({"greedy", "hungarian", "optimal", "optimal-flow"}));
  bench_cmd->add_option("--format", bench_opts.format, "text | json")
      ->check(CLI::IsMember({"text", "json"}));
  bench_cmd->add_option("--out", bench_opts.out, "report output (default stdout)");

  std::vector<const char*> argv{"matchforge"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (match->parsed()) return cmd_match(match_in, match_opts, out);
    if (oracle->parsed()) return cmd_oracle(oracle_in, oracle_m, out);
    return cmd_bench(bench_opts, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace matchforge::cli
