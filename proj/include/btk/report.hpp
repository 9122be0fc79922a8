#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "btk/bleu.hpp"
#include "btk/corpus.hpp"
#include "btk/translator.hpp"

namespace btk {

class ReportError : public Error {
 public:
  using Error::Error;
};

struct EvalColumn {
  Direction dir;
  DomainTag domain;
  std::optional<std::string> ref_path;  // needed only when a cell is a file

  std::string key() const;  // e.g. "en-vi/law"
};

// A cell is either a hypothesis file to score against the column reference,
// or a precomputed BLEU carried through verbatim.
struct CellSource {
  std::optional<std::string> hyp_path;
  std::optional<double> precomputed;
  std::string display;  // for precomputed cells, the input spelling
};

struct MatrixSpec {
  std::vector<EvalColumn> columns;
  std::vector<std::string> row_labels;
  std::map<std::pair<std::size_t, std::size_t>, CellSource> cells;  // (row, col)

  static MatrixSpec from_json(const nlohmann::ordered_json& manifest);
  static MatrixSpec load(const std::string& path);
};

struct EvalCell {
  double value = 0.0;
  std::string display;
};

struct EvalMatrix {
  std::vector<std::string> rows;
  std::vector<EvalColumn> columns;
  std::vector<std::vector<EvalCell>> cells;  // rows x columns

  std::string render_text() const;
  nlohmann::ordered_json to_json() const;
};

// Cells evaluate independently (up to `workers` in parallel).
EvalMatrix evaluate_matrix(const MatrixSpec& spec, const BleuConfig& config, int workers = 1);

struct CurvePoint {
  double data_amount = 0.0;
  double bleu = 0.0;
  std::optional<double> wall_hours;
};

struct BudgetCurve {
  std::vector<CurvePoint> points;  // data_amount strictly increasing, >= 2 points
  std::string label;

  void validate() const;
  bool has_wall_hours() const;
  // CSV columns: data_amount,bleu[,wall_hours]; header optional.
  static BudgetCurve load_csv(const std::string& path, std::string label);
};

struct CurveCrossing {
  bool reachable = false;
  bool clamped_at_start = false;  // first point already met the target
  double data_amount = 0.0;       // lower bound (curve max) when unreachable
  std::optional<double> wall_hours;
};

// First upward crossing of target_bleu, interpolated in (log data, BLEU).
CurveCrossing find_crossing(const BudgetCurve& curve, double target_bleu);

struct BudgetReport {
  double target_bleu = 0.0;
  CurveCrossing supervised;
  CurveCrossing pretraining;
  double data_ratio = 0.0;  // pretraining amount / supervised amount
  bool ratio_exact = false;
  std::optional<double> wall_time_ratio;  // only when both curves carry times

  nlohmann::ordered_json to_json() const;
};

BudgetReport budget_ratio(const BudgetCurve& supervised, const BudgetCurve& pretraining,
                          double target_bleu);

struct TierRecord {
  int tier = 0;
  double human_hours = 0.0;
  double machine_hours = 0.0;
  std::uint64_t pairs_collected = 0;
};

struct TierSummary {
  int tier = 0;
  double human_hours = 0.0;
  double machine_hours = 0.0;
  std::uint64_t pairs = 0;
  double pairs_per_hour = 0.0;
};

struct TimeReport {
  std::vector<TierSummary> tiers;  // ascending by tier

  std::string render_text() const;
  nlohmann::ordered_json to_json() const;
};

TimeReport time_report(const std::vector<TierRecord>& records);
std::vector<TierRecord> load_tier_records_csv(const std::string& path);

}  // namespace btk
