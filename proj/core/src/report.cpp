#include "dimfuse/report.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "dimfuse/error.hpp"

namespace dimfuse {

using nlohmann::json;

namespace {

std::string pad(std::string_view text, std::size_t width) {
  std::string out(text);
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}

/// Space-aligned grid; first row is the header.
std::string render_grid(const std::vector<std::vector<std::string>>& grid) {
  std::vector<std::size_t> widths;
  for (const auto& row : grid) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  std::string out;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    std::string line;
    for (std::size_t i = 0; i < grid[r].size(); ++i) {
      if (i) line += "  ";
      line += pad(grid[r][i], widths[i]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w;
      out += std::string(total + 2 * (widths.size() - 1), '-') + "\n";
    }
  }
  return out;
}

json confusion_to_json(const ConfusionMatrix& m) {
  json rows = json::array();
  for (std::size_t t = 0; t < m.classes(); ++t) {
    json row = json::array();
    for (std::size_t p = 0; p < m.classes(); ++p) row.push_back(m.at(t, p));
    rows.push_back(std::move(row));
  }
  return rows;
}

json report_json(const EvaluationReport& report) {
  json metrics = json::object();
  for (const auto& metric : all_metrics()) {
    const auto& r = report.at(metric);
    metrics[metric.name()] = {{"correct", r.correct},
                              {"total", r.total},
                              {"accuracy", r.accuracy},
                              {"confusion", confusion_to_json(r.confusion)}};
  }
  json skipped = json::array();
  for (const auto& s : report.skipped) {
    skipped.push_back({{"site_id", s.site_id}, {"reason", s.reason}});
  }
  auto [best, best_accuracy] = best_metric(report);
  return {{"labels", report.labels.names()},
          {"evaluated_sites", report.evaluated_sites},
          {"per_image_count", report.per_image_count},
          {"metrics", std::move(metrics)},
          {"skipped", std::move(skipped)},
          {"best", {{"metric", best.name()}, {"accuracy", best_accuracy}}},
          {"confusion_layout", "rows are true classes, columns are predicted classes; "
                               "PerImage counts images, every other metric counts sites"}};
}

EvaluationReport report_from(const json& doc) {
  EvaluationReport report;
  report.labels = LabelSet(doc.at("labels").get<std::vector<std::string>>());
  report.evaluated_sites = doc.at("evaluated_sites").get<std::uint64_t>();
  report.per_image_count = doc.at("per_image_count").get<std::uint64_t>();
  const std::size_t classes = report.labels.size();
  for (const auto& metric : all_metrics()) {
    const auto& m = doc.at("metrics").at(metric.name());
    MetricResult r;
    r.correct = m.at("correct").get<std::uint64_t>();
    r.total = m.at("total").get<std::uint64_t>();
    r.accuracy = m.at("accuracy").get<double>();
    r.confusion = ConfusionMatrix(classes);
    const auto& rows = m.at("confusion");
    if (rows.size() != classes) throw ValidationError("confusion matrix has wrong size");
    for (std::size_t t = 0; t < classes; ++t) {
      if (rows[t].size() != classes) throw ValidationError("confusion matrix has wrong size");
      for (std::size_t p = 0; p < classes; ++p) r.confusion.add(t, p, rows[t][p].get<std::uint64_t>());
    }
    report.metrics[static_cast<std::size_t>(metric.ordinal())] = std::move(r);
  }
  for (const auto& s : doc.at("skipped")) {
    report.skipped.push_back(
        SkippedSite{s.at("site_id").get<std::string>(), s.at("reason").get<std::string>()});
  }
  return report;
}

template <typename F>
auto parse_json_document(std::string_view text, std::string_view what, F&& build) {
  try {
    return build(json::parse(text));
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("{}: {}", what, e.what()));
  }
}

std::string plot_series_csv(const CheckpointSeries& series) {
  std::string out = "epoch,metric,accuracy\n";
  for (const auto& point : series.points) {
    for (const auto& metric : all_metrics()) {
      out += fmt::format("{},{},{}\n", point.epoch, metric.name(), point.report.accuracy(metric));
    }
  }
  return out;
}

}  // namespace

ReportFormat parse_report_format(std::string_view text) {
  if (text == "table") return ReportFormat::table;
  if (text == "csv") return ReportFormat::csv;
  if (text == "json") return ReportFormat::json;
  if (text == "plot-series") return ReportFormat::plot_series;
  throw std::invalid_argument(fmt::format("unknown report format '{}'", text));
}

std::string format_percent(double accuracy) { return fmt::format("{:.2f}%", accuracy * 100.0); }

std::string render_report(const EvaluationReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::json:
      return report_json(report).dump(1) + "\n";
    case ReportFormat::csv: {
      std::string out = "metric,accuracy,correct,total\n";
      for (const auto& metric : all_metrics()) {
        const auto& r = report.at(metric);
        out += fmt::format("{},{},{},{}\n", metric.name(), r.accuracy, r.correct, r.total);
      }
      return out;
    }
    case ReportFormat::table: {
      std::vector<std::vector<std::string>> grid = {{"Metric", "Accuracy", "Correct", "Total"}};
      for (const auto& metric : all_metrics()) {
        const auto& r = report.at(metric);
        grid.push_back({metric.name(), format_percent(r.accuracy), std::to_string(r.correct),
                        std::to_string(r.total)});
      }
      std::string out = render_grid(grid);
      auto [best, best_accuracy] = best_metric(report);
      out += fmt::format("\nBest metric: {} {}\n", best.name(), format_percent(best_accuracy));
      out += fmt::format("Evaluated sites: {}  images: {}  skipped: {}\n", report.evaluated_sites,
                         report.per_image_count, report.skipped.size());

      const auto& confusion = report.at(best).confusion;
      std::vector<std::vector<std::string>> cm = {{"true \\ predicted"}};
      for (std::size_t c = 0; c < report.labels.size(); ++c) {
        cm[0].push_back(fmt::format("{}={}", c + 1, report.labels.names()[c]));
      }
      for (std::size_t t = 0; t < confusion.classes(); ++t) {
        std::vector<std::string> row = {fmt::format("{}={}", t + 1, report.labels.names()[t])};
        for (std::size_t p = 0; p < confusion.classes(); ++p) {
          row.push_back(std::to_string(confusion.at(t, p)));
        }
        cm.push_back(std::move(row));
      }
      out += fmt::format("\nConfusion ({}):\n", best.name()) + render_grid(cm);
      if (!report.skipped.empty()) {
        out += "\nSkipped sites:\n";
        for (const auto& s : report.skipped) out += fmt::format("  {}  {}\n", s.site_id, s.reason);
      }
      return out;
    }
    case ReportFormat::plot_series:
      break;
  }
  throw std::invalid_argument("plot-series output needs a checkpoint series, not a single report");
}

std::string render_series(const CheckpointSeries& series, ReportFormat format) {
  switch (format) {
    case ReportFormat::json:
      return series_to_json(series);
    case ReportFormat::csv:
    case ReportFormat::plot_series:
      return plot_series_csv(series);
    case ReportFormat::table: {
      std::vector<std::vector<std::string>> grid = {{"Metric"}};
      for (const auto& point : series.points) grid[0].push_back(fmt::format("ep{}", point.epoch));
      for (const auto& metric : all_metrics()) {
        std::vector<std::string> row = {metric.name()};
        for (const auto& point : series.points) {
          row.push_back(format_percent(point.report.accuracy(metric)));
        }
        grid.push_back(std::move(row));
      }
      std::string out = render_grid(grid);
      if (auto best = best_over_series(series)) {
        out += fmt::format("\nBest over series: {} {} at epoch {}\n", best->metric.name(),
                           format_percent(best->accuracy), best->epoch);
        const auto& last = series.points.back();
        auto [metric, accuracy] = best_metric(last.report);
        out += fmt::format("Last point (epoch {}): {} {}\n", last.epoch, metric.name(),
                           format_percent(accuracy));
      }
      for (const auto& f : series.failed) {
        out += fmt::format("Failed checkpoint epoch {}: {}\n", f.epoch, f.error);
      }
      return out;
    }
  }
  throw std::invalid_argument("unknown report format");
}

std::string report_to_json(const EvaluationReport& report) {
  return render_report(report, ReportFormat::json);
}

EvaluationReport report_from_json(std::string_view text) {
  return parse_json_document(text, "report", [](const json& doc) { return report_from(doc); });
}

std::string series_to_json(const CheckpointSeries& series) {
  json points = json::array();
  for (const auto& p : series.points) {
    points.push_back({{"epoch", p.epoch}, {"report", report_json(p.report)}});
  }
  json failed = json::array();
  for (const auto& f : series.failed) failed.push_back({{"epoch", f.epoch}, {"error", f.error}});
  json doc = {{"points", std::move(points)}, {"failed", std::move(failed)}};
  if (auto best = best_over_series(series)) {
    doc["best_over_series"] = {
        {"metric", best->metric.name()}, {"accuracy", best->accuracy}, {"epoch", best->epoch}};
    const auto& last = series.points.back();
    auto [metric, accuracy] = best_metric(last.report);
    doc["last_point"] = {{"epoch", last.epoch}, {"metric", metric.name()}, {"accuracy", accuracy}};
  }
  return doc.dump(1) + "\n";
}

CheckpointSeries series_from_json(std::string_view text) {
  return parse_json_document(text, "series", [](const json& doc) {
    CheckpointSeries series;
    for (const auto& p : doc.at("points")) {
      series.points.push_back(CheckpointPoint{p.at("epoch").get<int>(), report_from(p.at("report"))});
    }
    for (const auto& f : doc.at("failed")) {
      series.failed.push_back(FailedCheckpoint{f.at("epoch").get<int>(), f.at("error").get<std::string>()});
    }
    return series;
  });
}

std::optional<double>& ComparisonTable::slot(const std::string& row, const std::string& column) {
  auto col = std::find(columns.begin(), columns.end(), column);
  if (col == columns.end()) {
    columns.push_back(column);
    for (auto& r : rows) r.cells.emplace_back();
    col = columns.end() - 1;
  }
  auto it = std::find_if(rows.begin(), rows.end(), [&](const Row& r) { return r.name == row; });
  if (it == rows.end()) {
    rows.push_back(Row{row, std::vector<std::optional<double>>(columns.size())});
    it = rows.end() - 1;
  }
  return it->cells[static_cast<std::size_t>(col - columns.begin())];
}

void ComparisonTable::set(const std::string& row, const std::string& column, double accuracy) {
  slot(row, column) = accuracy;
}

std::optional<double> ComparisonTable::get(const std::string& row, const std::string& column) const {
  auto col = std::find(columns.begin(), columns.end(), column);
  auto it = std::find_if(rows.begin(), rows.end(), [&](const Row& r) { return r.name == row; });
  if (col == columns.end() || it == rows.end()) return std::nullopt;
  return it->cells[static_cast<std::size_t>(col - columns.begin())];
}

void add_baselines_csv(ComparisonTable& table, std::string_view csv_text) {
  const auto rows = csv::parse(csv_text);
  if (rows.empty()) return;
  const auto& header = rows.front().fields;
  if (header.size() != 3 || header[0] != "row" || header[1] != "column" || header[2] != "accuracy") {
    throw ValidationError("baseline CSV header must be row,column,accuracy");
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    if (f.size() != 3) {
      throw ValidationError(fmt::format("baseline CSV line {}: expected 3 fields", rows[i].line));
    }
    if (f[2].empty() || f[2] == "-") {
      table.slot(f[0], f[1]).reset();
      continue;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), value);
    if (ec != std::errc() || ptr != f[2].data() + f[2].size() || value < 0.0 || value > 1.0) {
      throw ValidationError(
          fmt::format("baseline CSV line {}: accuracy '{}' is not in [0,1]", rows[i].line, f[2]));
    }
    table.set(f[0], f[1], value);
  }
}

std::string render_comparison(const ComparisonTable& table, ReportFormat format) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header = {table.corner};
  header.insert(header.end(), table.columns.begin(), table.columns.end());
  grid.push_back(std::move(header));
  for (const auto& row : table.rows) {
    std::vector<std::string> line = {row.name};
    for (const auto& cell : row.cells) line.push_back(cell ? format_percent(*cell) : "-");
    grid.push_back(std::move(line));
  }
  if (format == ReportFormat::table) return render_grid(grid);
  if (format == ReportFormat::csv) {
    std::string out;
    for (const auto& line : grid) out += csv::join(line) + "\n";
    return out;
  }
  throw std::invalid_argument("comparison tables render as table or csv");
}

}  // namespace dimfuse
