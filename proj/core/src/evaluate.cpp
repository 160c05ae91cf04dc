#include "dimfuse/evaluate.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "dimfuse/aggregate.hpp"
#include "dimfuse/error.hpp"
#include "log.hpp"

namespace dimfuse {

namespace fs = std::filesystem;

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t sum = 0;
  for (std::size_t c = 0; c < classes_; ++c) sum += at(c, c);
  return sum;
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(cells_.begin(), cells_.end(), std::uint64_t{0});
}

EvaluationSet build_evaluation_set(const DatasetManifest& manifest, const ScoreLoadResult& scores) {
  EvaluationSet set{manifest.labels, {}, {}};
  for (const auto& record : manifest.records) {
    if (record.split != Split::test) continue;
    auto it = scores.matrices.find(record.site_id);
    if (it != scores.matrices.end()) {
      set.sites.push_back(SiteEvidence{record, it->second});
      continue;
    }
    std::string reason = "no score file";
    for (const auto& issue : scores.issues) {
      if (issue.site_id == record.site_id) {
        reason = fmt::format("{} score file: {}", to_string(issue.kind), issue.message);
        break;
      }
    }
    set.skipped.push_back(SkippedSite{record.site_id, std::move(reason)});
  }
  return set;
}

namespace {

struct SiteOutcome {
  std::size_t truth = 0;
  std::array<std::size_t, 12> decided{};
  std::vector<std::size_t> image_predictions;
};

SiteOutcome judge(const SiteEvidence& site) {
  SiteOutcome out;
  out.truth = site.record.label.index;
  out.decided = decide_all(site.matrix);
  out.image_predictions.reserve(site.matrix.rows());
  for (std::size_t r = 0; r < site.matrix.rows(); ++r) {
    out.image_predictions.push_back(argmax(site.matrix.row(r)));
  }
  return out;
}

}  // namespace

EvaluationReport evaluate(const EvaluationSet& set, unsigned jobs) {
  EvaluationReport report;
  report.labels = set.labels;
  report.skipped = set.skipped;

  // Reduction order is fixed by site_id so the report never depends on input order.
  std::vector<const SiteEvidence*> sites;
  for (const auto& site : set.sites) {
    if (site.matrix.empty()) {
      report.skipped.push_back(SkippedSite{site.record.site_id, "no evidence"});
      continue;
    }
    if (site.matrix.classes() != set.labels.size()) {
      throw ValidationError(fmt::format("site '{}' has {} score columns for {} labels",
                                        site.record.site_id, site.matrix.classes(),
                                        set.labels.size()));
    }
    sites.push_back(&site);
  }
  std::sort(sites.begin(), sites.end(), [](const SiteEvidence* a, const SiteEvidence* b) {
    return a->record.site_id < b->record.site_id;
  });
  std::sort(report.skipped.begin(), report.skipped.end(),
            [](const SkippedSite& a, const SkippedSite& b) { return a.site_id < b.site_id; });
  if (sites.empty()) throw DomainError("empty evaluation set");

  std::vector<SiteOutcome> outcomes(sites.size());
  const unsigned workers =
      std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(sites.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < sites.size(); ++i) outcomes[i] = judge(*sites[i]);
  } else {
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < sites.size(); i += workers) outcomes[i] = judge(*sites[i]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  const std::size_t classes = set.labels.size();
  for (auto& m : report.metrics) m.confusion = ConfusionMatrix(classes);
  auto& per_image = report.metrics[static_cast<std::size_t>(MetricId::per_image().ordinal())];
  for (const auto& outcome : outcomes) {
    for (std::size_t m = 0; m < outcome.decided.size(); ++m) {
      report.metrics[m].confusion.add(outcome.truth, outcome.decided[m]);
    }
    for (std::size_t predicted : outcome.image_predictions) {
      per_image.confusion.add(outcome.truth, predicted);
    }
  }
  for (auto& m : report.metrics) {
    m.correct = m.confusion.trace();
    m.total = m.confusion.total();
    m.accuracy = static_cast<double>(m.correct) / static_cast<double>(m.total);
  }
  report.evaluated_sites = sites.size();
  report.per_image_count = per_image.total;
  return report;
}

std::pair<MetricId, double> best_metric(const EvaluationReport& report) {
  MetricId best = all_metrics().front();
  double best_accuracy = report.accuracy(best);
  for (const auto& metric : all_metrics()) {
    if (report.accuracy(metric) > best_accuracy) {
      best = metric;
      best_accuracy = report.accuracy(metric);
    }
  }
  return {best, best_accuracy};
}

std::string snapshot_dir_name(int epoch) { return fmt::format("epoch_{:03d}", epoch); }

std::vector<Snapshot> discover_snapshots(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw DomainError(fmt::format("snapshot root '{}' does not exist", root.string()));
  }
  std::vector<Snapshot> out;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (!name.starts_with("epoch_") || name.size() < 7) continue;
    int epoch = 0;
    auto [ptr, err] = std::from_chars(name.data() + 6, name.data() + name.size(), epoch);
    if (err != std::errc() || ptr != name.data() + name.size()) continue;
    out.push_back(Snapshot{epoch, entry.path()});
  }
  std::sort(out.begin(), out.end(),
            [](const Snapshot& a, const Snapshot& b) { return a.epoch < b.epoch; });
  return out;
}

CheckpointSeries sweep(const std::vector<Snapshot>& snapshots, const DatasetManifest& manifest,
                       SchemaMode mode, unsigned jobs) {
  for (std::size_t i = 1; i < snapshots.size(); ++i) {
    if (snapshots[i].epoch <= snapshots[i - 1].epoch) {
      throw std::invalid_argument("snapshot epochs must be strictly increasing");
    }
  }
  CheckpointSeries series;
  for (const auto& snapshot : snapshots) {
    try {
      auto scores = load_scores(snapshot.scores_dir, manifest, mode);
      auto set = build_evaluation_set(manifest, scores);
      series.points.push_back(CheckpointPoint{snapshot.epoch, evaluate(set, jobs)});
    } catch (const std::exception& e) {
      log::get()->warn("module=evaluate event=snapshot_failed epoch={} error=\"{}\"",
                       snapshot.epoch, e.what());
      series.failed.push_back(FailedCheckpoint{snapshot.epoch, e.what()});
    }
  }
  return series;
}

std::optional<SeriesBest> best_over_series(const CheckpointSeries& series) {
  std::optional<SeriesBest> best;
  for (const auto& point : series.points) {
    auto [metric, accuracy] = best_metric(point.report);
    if (!best || accuracy > best->accuracy) best = SeriesBest{metric, accuracy, point.epoch};
  }
  return best;
}

}  // namespace dimfuse
