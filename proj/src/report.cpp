#include "btk/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace btk {

namespace {

using nlohmann::ordered_json;

std::string direction_key(const Direction& dir) {
  return dir.src == Lang::en ? "en-vi" : "vi-en";
}

Direction parse_direction(std::string_view text) {
  if (text == "en-vi" || text == "en->vi") return Direction::en_to_vi();
  if (text == "vi-en" || text == "vi->en") return Direction::vi_to_en();
  throw ReportError("unknown direction '" + std::string(text) + "' (expected en-vi or vi-en)");
}

std::vector<std::string> read_lines(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ReportError("cannot open " + what + " file " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::string format_bleu(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

std::optional<double> parse_full_double(const std::string& text) {
  const std::string trimmed = trim(text);
  if (trimmed.empty()) return std::nullopt;
  try {
    std::size_t consumed = 0;
    const double value = std::stod(trimmed, &consumed);
    if (consumed != trimmed.size()) return std::nullopt;
    return value;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) widths[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::ostringstream out;
  const auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << "  ";
      if (c == 0) {
        out << row[c] << std::string(widths[c] - row[c].size(), ' ');
      } else {
        out << std::string(widths[c] - row[c].size(), ' ') << row[c];
      }
    }
    out << '\n';
  };
  emit(header);
  std::size_t total = 0;
  for (std::size_t w : widths) total += w + 2;
  out << std::string(total > 2 ? total - 2 : total, '-') << '\n';
  for (const auto& row : rows) emit(row);
  return out.str();
}

}  // namespace

std::string EvalColumn::key() const { return direction_key(dir) + "/" + domain.str(); }

MatrixSpec MatrixSpec::from_json(const ordered_json& manifest) {
  if (!manifest.is_object() || !manifest.contains("columns") || !manifest.contains("systems")) {
    throw ReportError("matrix manifest must contain 'columns' and 'systems'");
  }
  MatrixSpec spec;
  for (const auto& column : manifest["columns"]) {
    if (!column.contains("direction") || !column.contains("domain")) {
      throw ReportError("matrix column needs 'direction' and 'domain'");
    }
    EvalColumn col{parse_direction(column["direction"].get<std::string>()),
                   DomainTag::parse(column["domain"].get<std::string>()), std::nullopt};
    if (column.contains("ref")) col.ref_path = column["ref"].get<std::string>();
    spec.columns.push_back(std::move(col));
  }
  if (spec.columns.empty()) throw ReportError("matrix manifest has no columns");

  for (const auto& [label, row] : manifest["systems"].items()) {
    const std::size_t r = spec.row_labels.size();
    spec.row_labels.push_back(label);
    if (!row.is_object()) throw ReportError("system '" + label + "' must map cells to values");
    for (std::size_t c = 0; c < spec.columns.size(); ++c) {
      const std::string key = spec.columns[c].key();
      if (!row.contains(key)) {
        throw ReportError("system '" + label + "' is missing cell '" + key + "'");
      }
      const auto& value = row[key];
      CellSource source;
      if (value.is_number()) {
        source.precomputed = value.get<double>();
        source.display = value.dump();
      } else if (value.is_string()) {
        const std::string text = value.get<std::string>();
        if (auto num = parse_full_double(text)) {
          source.precomputed = *num;
          source.display = trim(text);
        } else {
          source.hyp_path = text;
        }
      } else {
        throw ReportError("cell '" + key + "' of system '" + label +
                          "' must be a file path or a number");
      }
      spec.cells[{r, c}] = std::move(source);
    }
  }
  if (spec.row_labels.empty()) throw ReportError("matrix manifest has no systems");
  return spec;
}

MatrixSpec MatrixSpec::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ReportError("cannot open matrix manifest " + path);
  ordered_json manifest;
  try {
    in >> manifest;
  } catch (const ordered_json::parse_error& e) {
    throw ReportError("matrix manifest " + path + ": " + e.what());
  }
  return from_json(manifest);
}

EvalMatrix evaluate_matrix(const MatrixSpec& spec, const BleuConfig& config, int workers) {
  EvalMatrix matrix;
  matrix.rows = spec.row_labels;
  matrix.columns = spec.columns;
  matrix.cells.assign(spec.row_labels.size(), std::vector<EvalCell>(spec.columns.size()));

  struct Task {
    std::size_t row;
    std::size_t col;
  };
  std::vector<Task> tasks;
  for (std::size_t r = 0; r < spec.row_labels.size(); ++r) {
    for (std::size_t c = 0; c < spec.columns.size(); ++c) {
      tasks.push_back({r, c});
    }
  }

  // Cells are independent and evaluate in parallel; each writes its own slot.
  parallel_for(tasks.size(), workers, [&](std::size_t t) {
    const Task& task = tasks[t];
    const auto it = spec.cells.find({task.row, task.col});
    if (it == spec.cells.end()) {
      throw ReportError("missing cell " + spec.columns[task.col].key() + " for system '" +
                        spec.row_labels[task.row] + "'");
    }
    const CellSource& source = it->second;
    EvalCell& cell = matrix.cells[task.row][task.col];
    const std::string where =
        "cell (" + spec.row_labels[task.row] + ", " + spec.columns[task.col].key() + ")";
    if (source.precomputed) {
      if (*source.precomputed < 0.0 || *source.precomputed > 100.0) {
        throw ReportError(where + ": BLEU must be in [0, 100]");
      }
      cell.value = *source.precomputed;
      cell.display = source.display;
      return;
    }
    if (!spec.columns[task.col].ref_path) {
      throw ReportError(where + ": column has no reference file");
    }
    const auto hyps = read_lines(*source.hyp_path, "hypothesis");
    const auto refs = read_lines(*spec.columns[task.col].ref_path, "reference");
    if (hyps.size() != refs.size()) {
      std::ostringstream msg;
      msg << where << ": line-count mismatch (" << hyps.size() << " hypotheses vs " << refs.size()
          << " references)";
      throw ReportError(msg.str());
    }
    if (hyps.empty()) throw ReportError(where + ": empty hypothesis file");
    const BleuBreakdown breakdown = corpus_bleu(hyps, refs, config);
    cell.value = breakdown.score;
    cell.display = format_bleu(breakdown.score);
  });
  return matrix;
}

std::string EvalMatrix::render_text() const {
  std::vector<std::string> header{"system"};
  for (const EvalColumn& col : columns) header.push_back(col.key());
  std::vector<std::vector<std::string>> body;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<std::string> row{rows[r]};
    for (const EvalCell& cell : cells[r]) row.push_back(cell.display);
    body.push_back(std::move(row));
  }
  return render_table(header, body);
}

ordered_json EvalMatrix::to_json() const {
  ordered_json j;
  ordered_json cols = ordered_json::array();
  for (const EvalColumn& col : columns) cols.push_back(col.key());
  j["columns"] = cols;
  ordered_json systems = ordered_json::object();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    ordered_json row = ordered_json::object();
    for (std::size_t c = 0; c < columns.size(); ++c) {
      row[columns[c].key()] = {{"bleu", cells[r][c].value}, {"display", cells[r][c].display}};
    }
    systems[rows[r]] = std::move(row);
  }
  j["systems"] = systems;
  return j;
}

void BudgetCurve::validate() const {
  if (points.size() < 2) {
    throw ReportError("curve '" + label + "' needs at least 2 points for interpolation");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].data_amount > 0)) {
      throw ReportError("curve '" + label + "': data amounts must be positive");
    }
    if (!std::isfinite(points[i].bleu)) {
      throw ReportError("curve '" + label + "': BLEU values must be finite");
    }
    if (i > 0 && points[i].data_amount <= points[i - 1].data_amount) {
      throw ReportError("curve '" + label + "': data amounts must be strictly increasing");
    }
  }
}

bool BudgetCurve::has_wall_hours() const {
  return std::all_of(points.begin(), points.end(),
                     [](const CurvePoint& p) { return p.wall_hours.has_value(); });
}

BudgetCurve BudgetCurve::load_csv(const std::string& path, std::string label) {
  BudgetCurve curve;
  curve.label = std::move(label);
  const auto lines = read_lines(path, "curve");
  std::size_t start = 0;
  if (!lines.empty() && !parse_full_double(split(lines[0], ',')[0])) start = 1;
  for (std::size_t i = start; i < lines.size(); ++i) {
    if (is_blank(lines[i])) continue;
    const auto fields = split(lines[i], ',');
    if (fields.size() < 2) {
      throw ReportError(path + " line " + std::to_string(i + 1) +
                        ": expected data_amount,bleu[,wall_hours]");
    }
    CurvePoint point;
    const auto amount = parse_full_double(fields[0]);
    const auto bleu = parse_full_double(fields[1]);
    if (!amount || !bleu) {
      throw ReportError(path + " line " + std::to_string(i + 1) + ": malformed number");
    }
    point.data_amount = *amount;
    point.bleu = *bleu;
    if (fields.size() >= 3 && !trim(fields[2]).empty()) {
      const auto wall = parse_full_double(fields[2]);
      if (!wall) {
        throw ReportError(path + " line " + std::to_string(i + 1) + ": malformed wall_hours");
      }
      point.wall_hours = *wall;
    }
    curve.points.push_back(point);
  }
  curve.validate();
  return curve;
}

CurveCrossing find_crossing(const BudgetCurve& curve, double target_bleu) {
  curve.validate();
  CurveCrossing crossing;
  const auto& pts = curve.points;
  if (pts.front().bleu >= target_bleu) {
    crossing.reachable = true;
    crossing.clamped_at_start = true;
    crossing.data_amount = pts.front().data_amount;
    crossing.wall_hours = pts.front().wall_hours;
    return crossing;
  }
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!(pts[i].bleu < target_bleu && target_bleu <= pts[i + 1].bleu)) continue;
    crossing.reachable = true;
    if (target_bleu == pts[i + 1].bleu) {
      crossing.data_amount = pts[i + 1].data_amount;
      crossing.wall_hours = pts[i + 1].wall_hours;
      return crossing;
    }
    const double t = (target_bleu - pts[i].bleu) / (pts[i + 1].bleu - pts[i].bleu);
    const double log_x = std::log(pts[i].data_amount) +
                         t * (std::log(pts[i + 1].data_amount) - std::log(pts[i].data_amount));
    crossing.data_amount = std::exp(log_x);
    if (pts[i].wall_hours && pts[i + 1].wall_hours) {
      const double log_w =
          std::log(*pts[i].wall_hours) + t * (std::log(*pts[i + 1].wall_hours) - std::log(*pts[i].wall_hours));
      crossing.wall_hours = std::exp(log_w);
    }
    return crossing;
  }
  // Never reaches the target: report the curve's maximum as a lower bound.
  crossing.reachable = false;
  crossing.data_amount = pts.back().data_amount;
  crossing.wall_hours = pts.back().wall_hours;
  return crossing;
}

BudgetReport budget_ratio(const BudgetCurve& supervised, const BudgetCurve& pretraining,
                          double target_bleu) {
  BudgetReport report;
  report.target_bleu = target_bleu;
  report.supervised = find_crossing(supervised, target_bleu);
  report.pretraining = find_crossing(pretraining, target_bleu);
  if (report.supervised.clamped_at_start && report.pretraining.clamped_at_start) {
    throw ReportError("target BLEU lies below the first point of both curves");
  }
  report.data_ratio = report.pretraining.data_amount / report.supervised.data_amount;
  report.ratio_exact = report.supervised.reachable && report.pretraining.reachable &&
                       !report.supervised.clamped_at_start && !report.pretraining.clamped_at_start;
  if (report.supervised.wall_hours && report.pretraining.wall_hours) {
    report.wall_time_ratio = *report.pretraining.wall_hours / *report.supervised.wall_hours;
  }
  return report;
}

nlohmann::ordered_json BudgetReport::to_json() const {
  const auto crossing_json = [](const CurveCrossing& c) {
    ordered_json j;
    j["reachable"] = c.reachable;
    j["clamped_at_start"] = c.clamped_at_start;
    j["data_amount"] = c.data_amount;
    if (c.wall_hours) j["wall_hours"] = *c.wall_hours;
    return j;
  };
  ordered_json j;
  j["target_bleu"] = target_bleu;
  j["supervised"] = crossing_json(supervised);
  j["pretraining"] = crossing_json(pretraining);
  j["data_ratio"] = data_ratio;
  j["ratio_exact"] = ratio_exact;
  if (!pretraining.reachable || !supervised.reachable) {
    j["data_ratio_is_bound"] = true;
  }
  if (wall_time_ratio) j["wall_time_ratio"] = *wall_time_ratio;
  return j;
}

TimeReport time_report(const std::vector<TierRecord>& records) {
  std::map<int, TierSummary> by_tier;
  for (const TierRecord& record : records) {
    TierSummary& row = by_tier[record.tier];
    row.tier = record.tier;
    row.human_hours += record.human_hours;
    row.machine_hours += record.machine_hours;
    row.pairs += record.pairs_collected;
  }
  TimeReport report;
  for (auto& [tier, row] : by_tier) {
    const double hours = row.human_hours + row.machine_hours;
    row.pairs_per_hour = hours > 0 ? static_cast<double>(row.pairs) / hours : 0.0;
    report.tiers.push_back(row);
  }
  return report;
}

std::string TimeReport::render_text() const {
  std::vector<std::string> header{"tier", "human_hours", "machine_hours", "pairs",
                                  "pairs_per_hour"};
  std::vector<std::vector<std::string>> body;
  char buf[64];
  for (const TierSummary& row : tiers) {
    std::vector<std::string> cells;
    cells.push_back(std::to_string(row.tier));
    std::snprintf(buf, sizeof(buf), "%.1f", row.human_hours);
    cells.emplace_back(buf);
    std::snprintf(buf, sizeof(buf), "%.1f", row.machine_hours);
    cells.emplace_back(buf);
    cells.push_back(std::to_string(row.pairs));
    std::snprintf(buf, sizeof(buf), "%.1f", row.pairs_per_hour);
    cells.emplace_back(buf);
    body.push_back(std::move(cells));
  }
  return render_table(header, body);
}

nlohmann::ordered_json TimeReport::to_json() const {
  ordered_json rows = ordered_json::array();
  for (const TierSummary& row : tiers) {
    ordered_json j;
    j["tier"] = row.tier;
    j["human_hours"] = row.human_hours;
    j["machine_hours"] = row.machine_hours;
    j["pairs"] = row.pairs;
    j["pairs_per_hour"] = row.pairs_per_hour;
    rows.push_back(std::move(j));
  }
  return ordered_json{{"tiers", rows}};
}

std::vector<TierRecord> load_tier_records_csv(const std::string& path) {
  const auto lines = read_lines(path, "tier record");
  std::vector<TierRecord> records;
  std::size_t start = 0;
  if (!lines.empty() && !parse_full_double(split(lines[0], ',')[0])) start = 1;
  for (std::size_t i = start; i < lines.size(); ++i) {
    if (is_blank(lines[i])) continue;
    const auto fields = split(lines[i], ',');
    if (fields.size() < 4) {
      throw ReportError(path + " line " + std::to_string(i + 1) +
                        ": expected tier,human_hours,machine_hours,pairs");
    }
    TierRecord record;
    try {
      record.tier = std::stoi(trim(fields[0]));
      record.human_hours = std::stod(trim(fields[1]));
      record.machine_hours = std::stod(trim(fields[2]));
      record.pairs_collected = std::stoull(trim(fields[3]));
    } catch (const std::exception&) {
      throw ReportError(path + " line " + std::to_string(i + 1) + ": malformed record");
    }
    records.push_back(record);
  }
  return records;
}

}  // namespace btk
