#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dimfuse/dataset.hpp"
#include "dimfuse/metric.hpp"
#include "dimfuse/score_io.hpp"
#include "dimfuse/score_matrix.hpp"

namespace dimfuse {

struct SkippedSite {
  std::string site_id;
  std::string reason;

  friend bool operator==(const SkippedSite&, const SkippedSite&) = default;
};

struct SiteEvidence {
  WebSiteRecord record;
  ScoreMatrix matrix;
};

/// Test-split sites paired with their score matrices.
struct EvaluationSet {
  LabelSet labels;
  std::vector<SiteEvidence> sites;
  std::vector<SkippedSite> skipped;
};

/// Pairs every test record with its loaded matrix. Records without a matrix
/// are registered as skipped ("no score file" or the load issue).
EvaluationSet build_evaluation_set(const DatasetManifest& manifest, const ScoreLoadResult& scores);

/// Square C x C count matrix indexed [true class][predicted class].
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t classes) : classes_(classes), cells_(classes * classes) {}

  std::size_t classes() const { return classes_; }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const {
    return cells_[truth * classes_ + predicted];
  }
  void add(std::size_t truth, std::size_t predicted, std::uint64_t n = 1) {
    cells_[truth * classes_ + predicted] += n;
  }
  std::uint64_t trace() const;
  std::uint64_t total() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t classes_ = 0;
  std::vector<std::uint64_t> cells_;
};

struct MetricResult {
  std::uint64_t correct = 0;
  std::uint64_t total = 0;
  double accuracy = 0.0;  // correct / total, full precision
  ConfusionMatrix confusion;

  friend bool operator==(const MetricResult&, const MetricResult&) = default;
};

/// Fusion metrics count sites; PerImage counts individual images.
struct EvaluationReport {
  LabelSet labels;
  std::array<MetricResult, kMetricCount> metrics;  // indexed by MetricId::ordinal()
  std::vector<SkippedSite> skipped;
  std::uint64_t evaluated_sites = 0;
  std::uint64_t per_image_count = 0;

  const MetricResult& at(MetricId metric) const {
    return metrics[static_cast<std::size_t>(metric.ordinal())];
  }
  double accuracy(MetricId metric) const { return at(metric).accuracy; }

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

/// Runs all 12 fusion metrics plus PerImage. Sites with no rows are skipped
/// with reason "no evidence" and excluded from every denominator.
/// `jobs` > 1 fans out per site; the result is bit-identical to jobs == 1.
/// Throws DomainError("empty evaluation set") if nothing is left to evaluate.
EvaluationReport evaluate(const EvaluationSet& set, unsigned jobs = 1);

/// Highest-accuracy metric; ties go to enumeration order (S, H, A, ascending
/// k, PerImage last).
std::pair<MetricId, double> best_metric(const EvaluationReport& report);

struct Snapshot {
  int epoch = 0;
  std::filesystem::path scores_dir;
};

struct CheckpointPoint {
  int epoch = 0;
  EvaluationReport report;

  friend bool operator==(const CheckpointPoint&, const CheckpointPoint&) = default;
};

struct FailedCheckpoint {
  int epoch = 0;
  std::string error;

  friend bool operator==(const FailedCheckpoint&, const FailedCheckpoint&) = default;
};

struct CheckpointSeries {
  std::vector<CheckpointPoint> points;  // epochs strictly increasing
  std::vector<FailedCheckpoint> failed;

  friend bool operator==(const CheckpointSeries&, const CheckpointSeries&) = default;
};

/// Finds `epoch_NNN` directories under `root`, sorted by epoch.
std::vector<Snapshot> discover_snapshots(const std::filesystem::path& root);

/// "epoch_005" for epoch 5.
std::string snapshot_dir_name(int epoch);

/// Evaluates every snapshot against the manifest. A snapshot that fails to
/// load or evaluate becomes a failed point; the sweep continues.
/// Throws std::invalid_argument if epochs are not strictly increasing.
CheckpointSeries sweep(const std::vector<Snapshot>& snapshots, const DatasetManifest& manifest,
                       SchemaMode mode, unsigned jobs = 1);

struct SeriesBest {
  MetricId metric;
  double accuracy;
  int epoch;
};

/// Best (metric, epoch) over the whole series; ties go to the earlier epoch,
/// then metric enumeration order. nullopt for an empty series.
std::optional<SeriesBest> best_over_series(const CheckpointSeries& series);

}  // namespace dimfuse
