#include "matchforge/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "matchforge/error.hpp"

namespace matchforge::io {

namespace {

using Json = nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw InvalidInput("line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& field, std::size_t line,
                    const std::string& column) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    fail(line, "column '" + column + "': '" + field + "' is not a finite number");
  }
  return v;
}

// Reads lines, skipping blank ones; `line_no` tracks the 1-based position.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) return true;
  }
  return false;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  return in;
}

Json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

Json optional_number(const std::optional<double>& v) {
  if (!v) return nullptr;
  return number_or_null(*v);
}

}  // namespace

UnitTable read_units_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw InvalidInput("units csv is empty");
  auto header = split_fields(line);
  if (header.size() < 2 || header[0] != "id" || header[1] != "treat") {
    fail(line_no, "header must start with 'id,treat'");
  }
  UnitTable table;
  std::size_t end = header.size();
  bool has_y = false;
  if (end > 2 && header[end - 1] == "y") {
    has_y = true;
    --end;
  }
  if (end > 2 && header[end - 1] == "score") {
    table.has_score = true;
    --end;
  }
  for (std::size_t k = 2; k < end; ++k) {
    if (header[k] == "score" || header[k] == "y" || header[k].empty()) {
      fail(line_no, "unexpected covariate column '" + header[k] + "'");
    }
    table.covariate_names.push_back(header[k]);
  }

  std::unordered_map<std::string, std::size_t> seen;
  while (next_line(in, line, line_no)) {
    auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      fail(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    Unit u;
    u.id = fields[0];
    if (u.id.empty()) fail(line_no, "empty id");
    if (!seen.emplace(u.id, line_no).second) fail(line_no, "duplicate id '" + u.id + "'");
    if (fields[1] == "1") {
      u.treatment = 1;
    } else if (fields[1] == "0") {
      u.treatment = 0;
    } else {
      fail(line_no, "treat must be 0 or 1, got '" + fields[1] + "'");
    }
    for (std::size_t k = 2; k < end; ++k) {
      u.covariates.push_back(parse_number(fields[k], line_no, header[k]));
    }
    std::size_t k = end;
    if (table.has_score) u.score = parse_number(fields[k++], line_no, "score");
    if (has_y) u.response = parse_number(fields[k], line_no, "y");
    table.units.push_back(std::move(u));
  }
  return table;
}

UnitTable read_units_csv_file(const std::string& path) {
  auto in = open(path);
  return read_units_csv(in);
}

BipartiteGraph read_edge_list_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw InvalidInput("edge list csv is empty");
  const auto header = split_fields(line);
  if (header != std::vector<std::string>{"treated_id", "control_id", "cost"}) {
    fail(line_no, "header must be 'treated_id,control_id,cost'");
  }
  std::vector<std::string> t_ids, c_ids;
  std::unordered_map<std::string, Index> t_index, c_index;
  std::vector<Edge> edges;
  std::set<std::pair<Index, Index>> seen;
  auto intern = [](std::vector<std::string>& ids,
                   std::unordered_map<std::string, Index>& index,
                   const std::string& id) {
    auto [it, inserted] = index.emplace(id, ids.size());
    if (inserted) ids.push_back(id);
    return it->second;
  };
  while (next_line(in, line, line_no)) {
    const auto fields = split_fields(line);
    if (fields.size() != 3) {
      fail(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) fail(line_no, "empty id");
    const double cost = parse_number(fields[2], line_no, "cost");
    if (cost < 0.0) fail(line_no, "cost must be non-negative");
    if (c_index.count(fields[0]) || t_index.count(fields[1])) {
      fail(line_no, "id used as both treated and control");
    }
    const Index ti = intern(t_ids, t_index, fields[0]);
    const Index ci = intern(c_ids, c_index, fields[1]);
    if (!seen.emplace(ti, ci).second) {
      fail(line_no, "duplicate edge " + fields[0] + "-" + fields[1]);
    }
    edges.push_back({ti, ci, cost});
  }
  try {
    return BipartiteGraph(std::move(t_ids), std::move(c_ids), std::move(edges));
  } catch (const InvalidInput& e) {
    throw InvalidInput(std::string("edge list: ") + e.what());
  }
}

BipartiteGraph read_edge_list_csv_file(const std::string& path) {
  auto in = open(path);
  return read_edge_list_csv(in);
}

std::vector<PairRow> pair_rows(const BipartiteGraph& graph,
                               const Matching& matching) {
  std::vector<PairRow> rows;
  rows.reserve(matching.size());
  for (const auto& p : matching.pairs) {
    rows.push_back({graph.treated_ids()[p.treated], graph.control_ids()[p.control],
                    *graph.cost(p.treated, p.control)});
  }
  std::sort(rows.begin(), rows.end(), [](const PairRow& a, const PairRow& b) {
    return a.treated_id != b.treated_id ? a.treated_id < b.treated_id
                                        : a.control_id < b.control_id;
  });
  return rows;
}

std::vector<PairRow> pair_rows(const BipartiteGraph& graph,
                               const MatchResult& result) {
  return pair_rows(graph, result.matching);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_pairs_csv(std::ostream& out, const std::vector<PairRow>& rows) {
  out << "treated_id,control_id,cost\n";
  for (const auto& r : rows) {
    out << r.treated_id << ',' << r.control_id << ',' << format_double(r.cost) << '\n';
  }
}

void write_pairs_json(std::ostream& out, const std::vector<PairRow>& rows) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    arr.push_back({{"treated_id", r.treated_id},
                   {"control_id", r.control_id},
                   {"cost", r.cost}});
  }
  out << arr.dump(2) << '\n';
}

std::vector<PairRow> read_pairs_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw InvalidInput("pairs csv is empty");
  if (split_fields(line) !=
      std::vector<std::string>{"treated_id", "control_id", "cost"}) {
    fail(line_no, "header must be 'treated_id,control_id,cost'");
  }
  std::vector<PairRow> rows;
  while (next_line(in, line, line_no)) {
    const auto f = split_fields(line);
    if (f.size() != 3) fail(line_no, "expected 3 fields");
    rows.push_back({f[0], f[1], parse_number(f[2], line_no, "cost")});
  }
  return rows;
}

Json balance_json(const BalanceReport& report) {
  Json rows = Json::array();
  for (const auto& b : report.covariates) {
    rows.push_back({{"covariate", b.name},
                    {"treated_mean", number_or_null(b.treated_mean)},
                    {"control_mean_before", number_or_null(b.control_mean)},
                    {"matched_treated_mean", optional_number(b.matched_treated_mean)},
                    {"matched_control_mean", optional_number(b.matched_control_mean)},
                    {"pooled_sd", number_or_null(b.pooled_sd)},
                    {"smd_before", number_or_null(b.smd_before)},
                    {"smd_after", optional_number(b.smd_after)}});
  }
  return {{"treated_count", report.treated_count},
          {"control_count", report.control_count},
          {"matched_pairs", report.matched_pairs},
          {"covariates", rows}};
}

Json summary_json(const BipartiteGraph& graph, const MatchResult& result,
                  const Json& config) {
  Json unmatched_t = Json::array();
  Json unmatched_c = Json::array();
  for (Index i : result.unmatched_treated) unmatched_t.push_back(graph.treated_ids()[i]);
  for (Index j : result.unmatched_control) unmatched_c.push_back(graph.control_ids()[j]);
  double total = 0.0;
  for (const auto& r : pair_rows(graph, result)) total += r.cost;
  Json s;
  s["cardinality"] = result.cardinality;
  // Summed in pairs.csv row order so the two files agree exactly.
  s["total_cost"] = total;
  s["optimality_gap_bound"] = optional_number(result.trace.optimality_gap_bound);
  s["n_treated"] = graph.num_treated();
  s["n_control"] = graph.num_control();
  s["unmatched_treated"] = unmatched_t;
  s["unmatched_control"] = unmatched_c;
  s["balance"] = result.balance ? balance_json(*result.balance) : Json(nullptr);
  s["trace"] = {{"iterations", result.trace.iterations},
                {"augmentations", result.trace.augmentations},
                {"cycles_canceled", result.trace.cycles_canceled},
                {"residual_scans", result.trace.residual_scans}};
  s["config"] = config;
  return s;
}

}  // namespace matchforge::io
