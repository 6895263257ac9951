#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "matchforge/data_model.hpp"
#include "matchforge/pipeline.hpp"

namespace matchforge::io {

// units-csv: header `id,treat,<covariates...>[,score][,y]`.
struct UnitTable {
  std::vector<Unit> units;
  std::vector<std::string> covariate_names;
  bool has_score = false;
};

// Throws InvalidInput naming the offending line.
UnitTable read_units_csv(std::istream& in);
UnitTable read_units_csv_file(const std::string& path);

// edge-list-csv: header `treated_id,control_id,cost`. Ids are indexed in
// order of first appearance.
BipartiteGraph read_edge_list_csv(std::istream& in);
BipartiteGraph read_edge_list_csv_file(const std::string& path);

struct PairRow {
  std::string treated_id;
  std::string control_id;
  double cost = 0.0;
};

// Rows of a result, sorted by treated id then control id.
std::vector<PairRow> pair_rows(const BipartiteGraph& graph,
                               const MatchResult& result);
std::vector<PairRow> pair_rows(const BipartiteGraph& graph,
                               const Matching& matching);

void write_pairs_csv(std::ostream& out, const std::vector<PairRow>& rows);
void write_pairs_json(std::ostream& out, const std::vector<PairRow>& rows);
std::vector<PairRow> read_pairs_csv(std::istream& in);

// Shortest representation that reads back to the same double.
std::string format_double(double v);

nlohmann::ordered_json balance_json(const BalanceReport& report);

// Deterministic summary: no wall-clock fields.
nlohmann::ordered_json summary_json(const BipartiteGraph& graph,
                                    const MatchResult& result,
                                    const nlohmann::ordered_json& config);

}  // namespace matchforge::io
