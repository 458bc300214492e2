#pragma once

// Run reports, metric tables (Markdown/CSV) and baseline-vs-treatment
// comparisons.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maraug/datasetio.hpp"
#include "maraug/detmetrics.hpp"
#include "maraug/error.hpp"

namespace maraug {

struct RunMetadata {
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::uint64_t> counts;
  std::string config_digest;
  std::vector<std::string> notes;
};

struct RunReport {
  std::string label;
  GroupedMetrics rows;
  std::map<int, ClassMetrics> per_class;
  std::map<int, std::string> class_names;
  RunMetadata metadata;

  /// Rows must cover All, Humans and Inanimate objects with metrics in [0,1].
  void validate() const {
    for (ReportGroup g : kReportGroups) {
      if (!rows.contains(g)) {
        throw Error(ErrorCode::GroupMismatch,
                    "report '" + label + "' lacks row '" + std::string(to_string(g)) + "'");
      }
    }
    auto check = [&](const ClassMetrics& m, std::string_view where) {
      for (double v : {m.precision, m.recall, m.f1, m.ap50, m.ap50_95}) {
        if (!(v >= 0.0 && v <= 1.0)) {
          throw Error(ErrorCode::OutOfRange,
                      "report '" + label + "' row '" + std::string(where) + "' has a metric outside [0,1]");
        }
      }
    };
    for (const auto& [g, m] : rows) check(m, to_string(g));
    for (const auto& [cls, m] : per_class) check(m, "class " + std::to_string(cls));
  }
};

enum class Metric { Precision, Recall, F1, MAP50, MAP50_95 };

inline constexpr std::array<Metric, 5> kMetrics{Metric::Precision, Metric::Recall, Metric::F1,
                                                Metric::MAP50, Metric::MAP50_95};

constexpr std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::Precision: return "Precision";
    case Metric::Recall: return "Recall";
    case Metric::F1: return "F1";
    case Metric::MAP50: return "mAP50";
    case Metric::MAP50_95: return "mAP50-95";
  }
  return "";
}

constexpr double metric_value(const ClassMetrics& m, Metric which) {
  switch (which) {
    case Metric::Precision: return m.precision;
    case Metric::Recall: return m.recall;
    case Metric::F1: return m.f1;
    case Metric::MAP50: return m.ap50;
    case Metric::MAP50_95: return m.ap50_95;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json metrics_to_json(const ClassMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
          {"map50", m.ap50},          {"map50_95", m.ap50_95}, {"support", m.support}};
}

inline ClassMetrics metrics_from_json(const nlohmann::json& j) {
  ClassMetrics m;
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.ap50 = j.at("map50").get<double>();
  m.ap50_95 = j.at("map50_95").get<double>();
  m.support = j.value("support", std::size_t{0});
  return m;
}

inline nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [g, m] : r.rows) {
    auto row = metrics_to_json(m);
    row["group"] = to_string(g);
    rows.push_back(row);
  }
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& [cls, m] : r.per_class) {
    auto row = metrics_to_json(m);
    row["class_id"] = cls;
    if (const auto it = r.class_names.find(cls); it != r.class_names.end()) row["name"] = it->second;
    classes.push_back(row);
  }
  nlohmann::json meta = {{"counts", r.metadata.counts},
                         {"config_digest", r.metadata.config_digest},
                         {"notes", r.metadata.notes}};
  meta["seed"] = r.metadata.seed ? nlohmann::json(*r.metadata.seed) : nlohmann::json(nullptr);
  return {{"label", r.label}, {"rows", rows}, {"classes", classes}, {"metadata", meta}};
}

inline RunReport report_from_json(const nlohmann::json& j) {
  RunReport r;
  try {
    r.label = j.at("label").get<std::string>();
    for (const auto& row : j.at("rows")) {
      const auto name = row.at("group").get<std::string>();
      const auto g = parse_report_group(name);
      if (!g) throw Error(ErrorCode::GroupMismatch, "unknown report group '" + name + "'");
      r.rows[*g] = metrics_from_json(row);
    }
    if (j.contains("classes")) {
      for (const auto& row : j.at("classes")) {
        const int cls = row.at("class_id").get<int>();
        r.per_class[cls] = metrics_from_json(row);
        if (row.contains("name")) r.class_names[cls] = row.at("name").get<std::string>();
      }
    }
    if (j.contains("metadata")) {
      const auto& meta = j.at("metadata");
      if (meta.contains("seed") && !meta.at("seed").is_null()) {
        r.metadata.seed = meta.at("seed").get<std::uint64_t>();
      }
      r.metadata.counts = meta.value("counts", std::map<std::string, std::uint64_t>{});
      r.metadata.config_digest = meta.value("config_digest", std::string{});
      r.metadata.notes = meta.value("notes", std::vector<std::string>{});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad run report: ") + e.what());
  }
  r.validate();
  return r;
}

inline RunReport load_report(const fs::path& file) {
  try {
    return report_from_json(nlohmann::json::parse(read_text_file(file)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, e.what(), file.string());
  } catch (const Error& e) {
    if (!e.path().empty()) throw;
    throw Error(e.code(), e.message(), file.string());
  }
}

inline void save_report(const RunReport& r, const fs::path& file) {
  write_text_file(file, report_to_json(r).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Tables

enum class TableFormat { Markdown, Csv };

inline std::optional<TableFormat> parse_table_format(std::string_view s) {
  if (s == "md" || s == "markdown") return TableFormat::Markdown;
  if (s == "csv") return TableFormat::Csv;
  return std::nullopt;
}

/// One rendered line of a metric table.
struct TableRow {
  std::string algorithm;
  std::string group;
  std::array<double, 5> values{};  // kMetrics order

  friend bool operator==(const TableRow&, const TableRow&) = default;
};

inline constexpr std::array<std::string_view, 7> kTableColumns{
    "Algorithm", "Class", "Precision", "Recall", "F1", "mAP50", "mAP50-95"};

namespace detail {

inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> parse_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw Error(ErrorCode::MalformedLine, "unterminated quote", {}, line_no);
  return fields;
}

inline std::string md_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace detail

inline std::vector<TableRow> table_rows(const std::vector<RunReport>& reports) {
  std::vector<TableRow> rows;
  for (const auto& r : reports) {
    for (ReportGroup g : kReportGroups) {
      const auto it = r.rows.find(g);
      const ClassMetrics m = it == r.rows.end() ? ClassMetrics{} : it->second;
      TableRow row{r.label, std::string(to_string(g)), {}};
      for (std::size_t k = 0; k < kMetrics.size(); ++k) row.values[k] = metric_value(m, kMetrics[k]);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline std::string render_rows(const std::vector<TableRow>& rows, TableFormat format) {
  std::string out;
  if (format == TableFormat::Csv) {
    for (std::size_t i = 0; i < kTableColumns.size(); ++i) {
      out += (i ? "," : "") + std::string(kTableColumns[i]);
    }
    out += "\n";
    for (const auto& row : rows) {
      out += detail::csv_field(row.algorithm) + "," + detail::csv_field(row.group);
      for (double v : row.values) out += "," + detail::fixed2(v);
      out += "\n";
    }
    return out;
  }
  out += "|";
  for (auto c : kTableColumns) out += " " + std::string(c) + " |";
  out += "\n|---|---|";
  for (std::size_t i = 2; i < kTableColumns.size(); ++i) out += "---:|";
  out += "\n";
  for (const auto& row : rows) {
    out += "| " + detail::md_cell(row.algorithm) + " | " + detail::md_cell(row.group) + " |";
    for (double v : row.values) out += " " + detail::fixed2(v) + " |";
    out += "\n";
  }
  return out;
}

/// Table with one All / Humans / Inanimate objects block per report, in
/// report order. Values are rounded to two decimals only here.
inline std::string render_table(const std::vector<RunReport>& reports, TableFormat format) {
  if (reports.empty()) throw Error(ErrorCode::InvalidArgument, "no reports to render");
  return render_rows(table_rows(reports), format);
}

/// Inverse of the CSV rendering (values come back at two-decimal precision).
inline std::vector<TableRow> parse_table_csv(std::string_view text) {
  std::vector<TableRow> rows;
  std::size_t line_no = 0;
  bool header = true;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = detail::parse_csv_line(line, line_no);
    if (fields.size() != kTableColumns.size()) {
      throw Error(ErrorCode::MalformedLine, "expected 7 columns", {}, line_no);
    }
    if (header) {
      header = false;
      if (fields[0] == kTableColumns[0]) continue;
    }
    TableRow row{fields[0], fields[1], {}};
    for (std::size_t k = 0; k < 5; ++k) {
      const auto v = detail::to_double(fields[k + 2]);
      if (!v) throw Error(ErrorCode::MalformedLine, "non-numeric metric '" + fields[k + 2] + "'", {}, line_no);
      row.values[k] = *v;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Comparison

struct ComparisonCell {
  ReportGroup group;
  Metric metric;
  double baseline = 0.0;
  double treatment = 0.0;
  double delta = 0.0;                    // treatment - baseline
  std::optional<double> improvement_pct;  // 100 * delta / baseline, if baseline > 0
};

struct RunComparison {
  std::string baseline_label;
  std::string treatment_label;
  std::vector<ComparisonCell> cells;

  const ComparisonCell& at(ReportGroup g, Metric m) const {
    for (const auto& c : cells) {
      if (c.group == g && c.metric == m) return c;
    }
    throw Error(ErrorCode::GroupMismatch, "no comparison cell for " + std::string(to_string(g)) +
                                              "/" + std::string(to_string(m)));
  }
};

inline RunComparison compare_runs(const RunReport& baseline, const RunReport& treatment) {
  for (const auto* pair : {&baseline, &treatment}) {
    const auto* other = pair == &baseline ? &treatment : &baseline;
    for (const auto& [g, m] : pair->rows) {
      if (!other->rows.contains(g)) {
        throw Error(ErrorCode::GroupMismatch, "group '" + std::string(to_string(g)) + "' is only in report '" +
                                                  pair->label + "'");
      }
    }
  }
  RunComparison out{baseline.label, treatment.label, {}};
  for (const auto& [g, base] : baseline.rows) {
    const ClassMetrics& treat = treatment.rows.at(g);
    for (Metric m : kMetrics) {
      ComparisonCell c{g, m, metric_value(base, m), metric_value(treat, m), 0.0, std::nullopt};
      c.delta = c.treatment - c.baseline;
      if (c.baseline > 0.0) c.improvement_pct = 100.0 * c.delta / c.baseline;
      out.cells.push_back(c);
    }
  }
  return out;
}

namespace detail {

inline std::string signed_fixed(double v, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  // Render a value that rounds to zero as +0.0 rather than -0.0.
  if (s.find_first_not_of("-0.") == std::string::npos) {
    if (s.front() == '-') s.erase(0, 1);
    return "+" + s;
  }
  return s.front() == '-' ? s : "+" + s;
}

}  // namespace detail

inline constexpr std::array<std::string_view, 7> kComparisonColumns{
    "Class", "Metric", "Baseline", "Treatment", "Delta", "Points", "Improvement"};

/// Delta in two decimals, the same delta in percentage points, and the
/// relative improvement over baseline in percent ("n/a" for a zero baseline).
inline std::string render_comparison(const RunComparison& cmp, TableFormat format) {
  std::vector<std::array<std::string, 7>> rows;
  for (const auto& c : cmp.cells) {
    rows.push_back({std::string(to_string(c.group)), std::string(to_string(c.metric)),
                    detail::fixed2(c.baseline), detail::fixed2(c.treatment),
                    detail::signed_fixed(c.delta, 2), detail::signed_fixed(100.0 * c.delta, 1),
                    c.improvement_pct ? detail::signed_fixed(*c.improvement_pct, 1) + "%" : "n/a"});
  }
  std::string out;
  if (format == TableFormat::Csv) {
    out += "Baseline run," + detail::csv_field(cmp.baseline_label) + "\n";
    out += "Treatment run," + detail::csv_field(cmp.treatment_label) + "\n";
    for (std::size_t i = 0; i < kComparisonColumns.size(); ++i) {
      out += (i ? "," : "") + std::string(kComparisonColumns[i]);
    }
    out += "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + detail::csv_field(r[i]);
      out += "\n";
    }
    return out;
  }
  out += "Baseline: " + cmp.baseline_label + "  \nTreatment: " + cmp.treatment_label + "\n\n|";
  for (auto c : kComparisonColumns) out += " " + std::string(c) + " |";
  out += "\n|---|---|---:|---:|---:|---:|---:|\n";
  for (const auto& r : rows) {
    out += "|";
    for (const auto& f : r) out += " " + detail::md_cell(f) + " |";
    out += "\n";
  }
  return out;
}

}  // namespace maraug
