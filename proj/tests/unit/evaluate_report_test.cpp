#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dimfuse/error.hpp"
#include "dimfuse/evaluate.hpp"
#include "dimfuse/fsutil.hpp"
#include "dimfuse/report.hpp"
#include "support.hpp"

namespace dimfuse {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::fixture_dir;

DatasetManifest mini_manifest() {
  return parse_manifest(fixture_dir() / "mini/manifest.csv", ManifestFormat::csv, reference_labels());
}

EvaluationReport mini_report(unsigned jobs) {
  const auto manifest = mini_manifest();
  return evaluate(
      build_evaluation_set(manifest, load_scores(fixture_dir() / "mini/scores", manifest, SchemaMode::softmax)),
      jobs);
}

TEST(Evaluate, MiniFixtureMatchesOracle) {
  const auto report = mini_report(1);
  const auto expected = json::parse(read_file(fixture_dir() / "mini/expected_report.json"));
  EXPECT_EQ(report.labels.names(), expected["labels"].get<std::vector<std::string>>());
  EXPECT_EQ(report.evaluated_sites, expected["evaluated_sites"].get<std::uint64_t>());
  EXPECT_EQ(report.per_image_count, expected["per_image_count"].get<std::uint64_t>());
  for (const auto& metric : all_metrics()) {
    const auto& want = expected["metrics"][metric.name()];
    const auto& got = report.at(metric);
    EXPECT_EQ(got.correct, want["correct"].get<std::uint64_t>()) << metric.name();
    EXPECT_EQ(got.total, want["total"].get<std::uint64_t>()) << metric.name();
    EXPECT_EQ(got.accuracy, want["accuracy"].get<double>()) << metric.name();
    for (std::size_t t = 0; t < 4; ++t) {
      for (std::size_t p = 0; p < 4; ++p) {
        EXPECT_EQ(got.confusion.at(t, p), want["confusion"][t][p].get<std::uint64_t>()) << metric.name();
      }
    }
  }
  const auto [best, accuracy] = best_metric(report);
  EXPECT_EQ(best.name(), expected["best"]["metric"].get<std::string>());
  EXPECT_EQ(accuracy, expected["best"]["accuracy"].get<double>());
}

TEST(Evaluate, AccuracyIsTraceOverTotal) {
  const auto report = mini_report(1);
  for (const auto& metric : all_metrics()) {
    const auto& r = report.at(metric);
    EXPECT_EQ(r.correct, r.confusion.trace());
    EXPECT_EQ(r.total, r.confusion.total());
    EXPECT_EQ(r.accuracy, static_cast<double>(r.confusion.trace()) / static_cast<double>(r.confusion.total()));
    EXPECT_EQ(r.total, metric.is_fusion() ? report.evaluated_sites : report.per_image_count);
  }
}

TEST(Evaluate, ParallelIsBitIdentical) {
  const auto serial = mini_report(1);
  for (unsigned jobs : {2u, 5u, 16u}) EXPECT_EQ(mini_report(jobs), serial) << jobs;
}

TEST(Evaluate, SkipsSitesWithoutEvidence) {
  const auto manifest = mini_manifest();
  ScoreLoadResult scores = load_scores(fixture_dir() / "mini/scores", manifest, SchemaMode::softmax);
  scores.matrices.erase("mini_02");
  scores.matrices.at("mini_03") = ScoreMatrix("mini_03", 4);
  scores.issues.push_back(LoadIssue{LoadIssue::Kind::invalid, "mini_05.json", "mini_05", "bad row"});
  scores.matrices.erase("mini_05");

  const auto report = evaluate(build_evaluation_set(manifest, scores));
  EXPECT_EQ(report.evaluated_sites, 9u);
  const std::vector<SkippedSite> skipped = {{"mini_02", "no score file"},
                                            {"mini_03", "no evidence"},
                                            {"mini_05", "invalid score file: bad row"}};
  EXPECT_EQ(report.skipped, skipped);
  for (const auto& metric : fusion_metrics()) EXPECT_EQ(report.at(metric).total, 9u);
}

TEST(Evaluate, EmptySetIsADomainError) {
  const auto manifest = mini_manifest();
  EXPECT_THROW(evaluate(build_evaluation_set(manifest, ScoreLoadResult{})), DomainError);
}

TEST(Report, TableUsesTwoDecimalPercentages) {
  EXPECT_EQ(format_percent(0.949), "94.90%");
  EXPECT_EQ(format_percent(1.0), "100.00%");
  EXPECT_EQ(format_percent(2.0 / 3.0), "66.67%");
  const std::string table = render_report(mini_report(1), ReportFormat::table);
  EXPECT_NE(table.find("S15       75.00%"), std::string::npos) << table;
  EXPECT_NE(table.find("Best metric: S15 75.00%"), std::string::npos);
  EXPECT_NE(table.find("1=machinery"), std::string::npos);
}

TEST(Report, CsvAndJson) {
  const auto report = mini_report(1);
  const std::string csv = render_report(report, ReportFormat::csv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "metric,accuracy,correct,total");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 14);
  EXPECT_EQ(report_from_json(render_report(report, ReportFormat::json)), report);
  EXPECT_THROW(render_report(report, ReportFormat::plot_series), std::invalid_argument);
  EXPECT_THROW(parse_report_format("xml"), std::invalid_argument);
  EXPECT_EQ(parse_report_format("plot-series"), ReportFormat::plot_series);
  EXPECT_THROW(report_from_json("{}"), ValidationError);
}

class SweepTest : public ::testing::Test {
 protected:
  testing::TempDir dir;
  DatasetManifest manifest = mini_manifest();

  void copy_scores(int epoch) {
    const fs::path target = dir / snapshot_dir_name(epoch);
    fs::create_directories(target);
    for (const auto& entry : fs::directory_iterator(fixture_dir() / "mini/scores")) {
      fs::copy_file(entry.path(), target / entry.path().filename());
    }
  }
};

TEST_F(SweepTest, EvaluatesEverySnapshotAndRecordsFailures) {
  copy_scores(5);
  copy_scores(10);
  fs::create_directories(dir / "epoch_015");  // no score files -> empty evaluation set
  fs::create_directories(dir / "notes");
  EXPECT_EQ(snapshot_dir_name(5), "epoch_005");

  const auto snapshots = discover_snapshots(dir.path());
  ASSERT_EQ(snapshots.size(), 3u);
  EXPECT_EQ(snapshots[2].epoch, 15);

  const auto series = sweep(snapshots, manifest, SchemaMode::softmax, 2);
  ASSERT_EQ(series.points.size(), 2u);
  ASSERT_EQ(series.failed.size(), 1u);
  EXPECT_EQ(series.failed[0].epoch, 15);
  EXPECT_EQ(series.points[0].report, series.points[1].report);

  const auto best = best_over_series(series);
  ASSERT_TRUE(best);
  EXPECT_EQ(best->epoch, 5);
  EXPECT_EQ(best->metric.name(), "S15");

  EXPECT_EQ(series_from_json(series_to_json(series)), series);
  const std::string table = render_series(series, ReportFormat::table);
  EXPECT_NE(table.find("Best over series: S15 75.00% at epoch 5"), std::string::npos) << table;
  EXPECT_NE(table.find("Failed checkpoint epoch 15"), std::string::npos);
  const std::string plot = render_series(series, ReportFormat::plot_series);
  EXPECT_EQ(plot.substr(0, plot.find('\n')), "epoch,metric,accuracy");
  EXPECT_EQ(std::count(plot.begin(), plot.end(), '\n'), 1 + 2 * 13);
}

TEST_F(SweepTest, RejectsUnorderedEpochs) {
  const std::vector<Snapshot> snapshots = {{10, dir.path()}, {5, dir.path()}};
  EXPECT_THROW(sweep(snapshots, manifest, SchemaMode::softmax), std::invalid_argument);
  EXPECT_FALSE(best_over_series(CheckpointSeries{}));
}

TEST(Comparison, BlankCellsRenderAsDash) {
  ComparisonTable table;
  table.set("Subset10", "S20", 0.975);
  table.set("Google10", "A20", 0.949);
  add_baselines_csv(table, "row,column,accuracy\nGoogle10,Page content,0.9265\nSubset10,Page content,-\n");
  EXPECT_EQ(table.get("Subset10", "A20"), std::nullopt);
  EXPECT_EQ(table.get("Google10", "Page content"), 0.9265);

  const std::string csv = render_comparison(table, ReportFormat::csv);
  EXPECT_EQ(csv, "Train set,S20,A20,Page content\nSubset10,97.50%,-,-\nGoogle10,-,94.90%,92.65%\n");
  const std::string grid = render_comparison(table, ReportFormat::table);
  EXPECT_NE(grid.find("94.90%"), std::string::npos);
  EXPECT_THROW(render_comparison(table, ReportFormat::json), std::invalid_argument);
  EXPECT_THROW(add_baselines_csv(table, "a,b\n"), ValidationError);
  EXPECT_THROW(add_baselines_csv(table, "row,column,accuracy\nx,y,1.5\n"), ValidationError);
}

}  // namespace
}  // namespace dimfuse
