#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dimfuse/evaluate.hpp"

namespace dimfuse {

enum class ReportFormat { table, csv, json, plot_series };

/// "table", "csv", "json", "plot-series"; throws std::invalid_argument otherwise.
ReportFormat parse_report_format(std::string_view text);

/// 0.949 -> "94.90%". Rounding is presentation-only.
std::string format_percent(double accuracy);

/// plot-series needs epochs and is rejected for a single report.
std::string render_report(const EvaluationReport& report, ReportFormat format);

/// table: metrics x epochs grid plus best-over-series and last-point lines.
/// csv / plot-series: epoch,metric,accuracy rows. json: full series.
std::string render_series(const CheckpointSeries& series, ReportFormat format);

std::string report_to_json(const EvaluationReport& report);
/// Throws ValidationError on a malformed document.
EvaluationReport report_from_json(std::string_view text);

std::string series_to_json(const CheckpointSeries& series);
CheckpointSeries series_from_json(std::string_view text);

/// Method-comparison grid: rows are runs (training sets), columns are
/// methods. Cells without a value render as "-".
struct ComparisonTable {
  std::string corner = "Train set";
  std::vector<std::string> columns;
  struct Row {
    std::string name;
    std::vector<std::optional<double>> cells;
  };
  std::vector<Row> rows;

  /// Cell for (row, column); creates the row/column on first use.
  std::optional<double>& slot(const std::string& row, const std::string& column);
  void set(const std::string& row, const std::string& column, double accuracy);
  std::optional<double> get(const std::string& row, const std::string& column) const;
};

/// Reads externally supplied cells from CSV with header row,column,accuracy
/// (accuracy as a fraction in [0,1]; "-" or empty reserves an empty cell).
void add_baselines_csv(ComparisonTable& table, std::string_view csv_text);

/// table or csv only.
std::string render_comparison(const ComparisonTable& table, ReportFormat format);

}  // namespace dimfuse
