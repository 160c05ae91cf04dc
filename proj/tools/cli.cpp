#include "cli.hpp"

#include <atomic>
#include <csignal>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "dimfuse/aggregate.hpp"
#include "dimfuse/dataset.hpp"
#include "dimfuse/error.hpp"
#include "dimfuse/evaluate.hpp"
#include "dimfuse/fetch.hpp"
#include "dimfuse/fsutil.hpp"
#include "dimfuse/image_stats.hpp"
#include "dimfuse/logging.hpp"
#include "dimfuse/report.hpp"
#include "dimfuse/score_io.hpp"
#include "dimfuse/scorer.hpp"
#include "dimfuse/synth.hpp"

#ifndef DIMFUSE_VERSION
#define DIMFUSE_VERSION "0.0.0"
#endif

namespace dimfuse::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Bad flag values found after CLI11 parsing; mapped to the usage exit code.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::atomic<bool> g_interrupted{false};

extern "C" void on_interrupt(int) { g_interrupted.store(true); }

struct ManifestArgs {
  std::string path;
  std::string labels;  // comma-separated column order for CSV manifests

  void add_to(CLI::App* app) {
    app->add_option("--manifest,-m", path, "Dataset manifest (.csv or .json)")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--labels", labels,
                    "Comma-separated label order for CSV manifests (default: sorted names)");
  }

  DatasetManifest load() const {
    std::optional<LabelSet> order;
    if (!labels.empty()) {
      std::vector<std::string> names;
      std::stringstream ss(labels);
      for (std::string name; std::getline(ss, name, ',');) names.push_back(name);
      order = LabelSet(std::move(names));
    }
    return parse_manifest(path, manifest_format_for(path), order);
  }
};

template <typename Fn>
auto usage_guard(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

void emit(const std::string& text, const std::string& output, std::ostream& out) {
  if (output.empty()) {
    out << text;
  } else {
    write_file_atomic(output, text);
  }
}

unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

// ------------------------------------------------------------------ synth

struct SynthArgs {
  std::string out;
  SynthParams params;
  std::string split = "test";
};

int run_synth(const SynthArgs& a, std::ostream& out) {
  SynthParams params = a.params;
  params.split = usage_guard([&] { return parse_split(a.split); });
  const auto manifest = usage_guard([&] { return synthesize(params, a.out); });
  out << fmt::format("wrote {} sites ({} classes, {} images each) to {}\n", manifest.records.size(),
                     manifest.labels.size(), params.images, a.out);
  return kExitOk;
}

// ------------------------------------------------------------------ score

struct ScoreArgs {
  ManifestArgs manifest;
  std::string images;
  std::string out;
  std::string scorer = "stub";
  StubParams stub;
  std::vector<std::string> class_rates;
  std::string precomputed;
  std::string adapter;
  std::string granularity = "per-site";
  std::string split = "test";
  std::string mode = "softmax";
};

int run_score(const ScoreArgs& a, std::ostream& out) {
  const auto manifest = a.manifest.load();
  ScoreDatasetOptions options;
  options.mode = usage_guard([&] { return parse_schema_mode(a.mode); });
  if (a.split != "all") options.split = usage_guard([&] { return parse_split(a.split); });

  ScorerSpec spec;
  if (a.scorer == "stub") {
    StubParams stub = a.stub;
    for (const auto& item : a.class_rates) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError(fmt::format("--class-rate expects NAME=RATE, got '{}'", item));
      const std::string name = item.substr(0, eq);
      manifest.labels.require(name);
      try {
        stub.class_rate[name] = std::stod(item.substr(eq + 1));
      } catch (const std::exception&) {
        throw UsageError(fmt::format("--class-rate has a bad rate in '{}'", item));
      }
    }
    spec = stub;
  } else if (a.scorer == "precomputed") {
    if (a.precomputed.empty()) throw UsageError("--scorer precomputed needs --precomputed DIR");
    spec = PrecomputedParams{a.precomputed};
  } else {
    if (a.adapter.empty()) throw UsageError("--scorer external needs --adapter CMD");
    ExternalParams ext{a.adapter, ExternalParams::Granularity::per_site};
    if (a.granularity == "per-image") ext.granularity = ExternalParams::Granularity::per_image;
    spec = ext;
  }
  if (a.scorer != "precomputed" && a.images.empty()) throw UsageError("--images is required for this scorer");

  const auto summary = score_dataset(manifest, a.images, spec, a.out, options);
  out << fmt::format("scored {} sites, {} images; {} failed\n", summary.sites_scored,
                     summary.images_scored, summary.failures.size());
  for (const auto& f : summary.failures) out << fmt::format("  {}: {}\n", f.site_id, f.error);
  return summary.failures.empty() ? kExitOk : kExitDomain;
}

// ------------------------------------------------------------------ classify

struct ClassifyArgs {
  std::string scores;
  std::string site;
  std::vector<std::string> metrics;
  std::string mode = "softmax";
  std::string format = "table";
};

int run_classify(const ClassifyArgs& a, std::ostream& out) {
  fs::path file = a.scores;
  if (fs::is_directory(file)) {
    if (a.site.empty()) throw UsageError("--site is required when --scores is a directory");
    file /= a.site + ".json";
  }
  const ScoreDocument doc = parse_score_document(read_file(file));
  if (!a.site.empty() && doc.matrix.site_id() != a.site) {
    throw ValidationError(fmt::format("'{}' holds scores for site '{}', not '{}'", file.string(),
                                      doc.matrix.site_id(), a.site));
  }
  const SchemaMode mode = usage_guard([&] { return parse_schema_mode(a.mode); });
  if (auto verdict = validate_matrix(doc.matrix, doc.labels, mode); !verdict.valid()) {
    throw ValidationError(fmt::format("invalid score file '{}': {}", file.string(), verdict.summary()));
  }
  std::vector<MetricId> metrics;
  for (const auto& m : a.metrics) {
    const MetricId id = usage_guard([&] { return parse_metric(m); });
    if (!id.is_fusion()) throw UsageError("classify works on fusion metrics only");
    metrics.push_back(id);
  }
  if (metrics.empty()) {
    const auto all = fusion_metrics();
    metrics.assign(all.begin(), all.end());
  }

  if (a.format == "json") {
    json results = json::array();
    for (const auto& m : metrics) {
      const auto fused = fuse(doc.matrix, m, doc.labels);
      results.push_back({{"metric", m.name()},
                         {"per_class", fused.per_class},
                         {"decided", fused.decided.name},
                         {"images_used", fused.images_used}});
    }
    out << json{{"site_id", doc.matrix.site_id()}, {"labels", doc.labels.names()}, {"results", results}}
               .dump(1)
        << "\n";
    return kExitOk;
  }
  if (metrics.size() == 1) {
    out << fuse(doc.matrix, metrics.front(), doc.labels).decided.name << "\n";
    return kExitOk;
  }
  std::string header = fmt::format("{:<9}", "metric");
  for (const auto& name : doc.labels.names()) header += fmt::format(" {:>12}", name);
  out << header << fmt::format(" {:>7}  decided\n", "images");
  for (const auto& m : metrics) {
    const auto fused = fuse(doc.matrix, m, doc.labels);
    std::string line = fmt::format("{:<9}", m.name());
    for (double v : fused.per_class) line += fmt::format(" {:>12.8f}", v);
    out << line << fmt::format(" {:>7}  {}\n", fused.images_used, fused.decided.name);
  }
  return kExitOk;
}

// ------------------------------------------------------------------ evaluate / sweep / report

struct EvaluateArgs {
  ManifestArgs manifest;
  std::string scores;
  std::string mode = "softmax";
  std::string format = "table";
  std::string output;
  unsigned jobs = default_jobs();
};

int run_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const auto format = usage_guard([&] { return parse_report_format(a.format); });
  if (format == ReportFormat::plot_series) throw UsageError("plot-series needs a sweep, not a single evaluation");
  const SchemaMode mode = usage_guard([&] { return parse_schema_mode(a.mode); });
  const auto manifest = a.manifest.load();
  const auto loaded = load_scores(a.scores, manifest, mode);
  const auto report = evaluate(build_evaluation_set(manifest, loaded), a.jobs);
  emit(render_report(report, format), a.output, out);
  return kExitOk;
}

struct SweepArgs {
  ManifestArgs manifest;
  std::string snapshots;
  std::string mode = "softmax";
  std::string format = "table";
  std::string output;
  unsigned jobs = default_jobs();
};

int run_sweep(const SweepArgs& a, std::ostream& out) {
  const auto format = usage_guard([&] { return parse_report_format(a.format); });
  const SchemaMode mode = usage_guard([&] { return parse_schema_mode(a.mode); });
  const auto manifest = a.manifest.load();
  const auto snapshots = discover_snapshots(a.snapshots);
  if (snapshots.empty()) throw DomainError(fmt::format("no epoch_NNN directories under '{}'", a.snapshots));
  const auto series = sweep(snapshots, manifest, mode, a.jobs);
  emit(render_series(series, format), a.output, out);
  return series.points.empty() ? kExitDomain : kExitOk;
}

struct ReportArgs {
  std::string input;
  std::vector<std::string> compare;  // ROW=report.json
  std::vector<std::string> columns;  // metric names for comparison columns
  std::string baselines;
  std::string format = "table";
  std::string output;
};

int run_report(const ReportArgs& a, std::ostream& out) {
  const auto format = usage_guard([&] { return parse_report_format(a.format); });
  if (!a.compare.empty() || !a.baselines.empty()) {
    if (format != ReportFormat::table && format != ReportFormat::csv) {
      throw UsageError("comparison tables render as table or csv");
    }
    ComparisonTable table;
    std::vector<MetricId> columns;
    for (const auto& c : a.columns) columns.push_back(usage_guard([&] { return parse_metric(c); }));
    if (columns.empty()) columns = {parse_metric("S20"), parse_metric("H20"), parse_metric("A20")};
    for (const auto& item : a.compare) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError(fmt::format("--compare expects ROW=FILE, got '{}'", item));
      const auto report = report_from_json(read_file(item.substr(eq + 1)));
      for (const auto& m : columns) table.set(item.substr(0, eq), m.name(), report.accuracy(m));
    }
    if (!a.baselines.empty()) add_baselines_csv(table, read_file(a.baselines));
    emit(render_comparison(table, format), a.output, out);
    return kExitOk;
  }
  if (a.input.empty()) throw UsageError("report needs --input or --compare");
  const std::string text = read_file(a.input);
  json probe;
  try {
    probe = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("'{}' is not JSON: {}", a.input, e.what()));
  }
  if (probe.is_object() && probe.contains("points")) {
    emit(render_series(series_from_json(text), format), a.output, out);
  } else {
    if (format == ReportFormat::plot_series) throw UsageError("plot-series needs a sweep series input");
    emit(render_report(report_from_json(text), format), a.output, out);
  }
  return kExitOk;
}

// ------------------------------------------------------------------ stats

struct StatsArgs {
  ManifestArgs manifest;
  std::string images;
  ScanOptions scan;
  std::string format = "json";
  std::string output;
};

int run_stats(StatsArgs a, std::ostream& out) {
  if (a.format != "json" && a.format != "csv") throw UsageError("stats formats are json and csv");
  const auto manifest = a.manifest.load();
  std::optional<ImageSetStats> images;
  if (!a.images.empty()) {
    if (!fs::is_directory(a.images)) throw DomainError(fmt::format("no image root at '{}'", a.images));
    images = usage_guard([&] { return scan_image_sets(a.images, manifest, a.scan); });
  }
  emit(a.format == "json" ? stats_json(manifest, images) : stats_csv(manifest, images), a.output, out);
  return kExitOk;
}

// ------------------------------------------------------------------ fetch

struct FetchArgs {
  ManifestArgs manifest;
  std::string images;
  std::string provider = "mock";
  std::string provider_config;
  std::uint64_t mock_seed = 42;
  FetchPolicy policy;
  std::vector<std::string> mimes;
  long timeout_ms = 10000;
  long host_delay_ms = 0;
  std::string query_mode = "url";
  std::string report;
};

int run_fetch(FetchArgs a, std::ostream& out) {
  if (!a.mimes.empty()) a.policy.allowed_mimes = {a.mimes.begin(), a.mimes.end()};
  a.policy.request_timeout = std::chrono::milliseconds(a.timeout_ms);
  a.policy.per_host_delay = std::chrono::milliseconds(a.host_delay_ms);
  a.policy.query_mode = usage_guard([&] { return parse_query_mode(a.query_mode); });
  usage_guard([&] {
    a.policy.validate();
    return 0;
  });
  const auto manifest = a.manifest.load();

  std::unique_ptr<Provider> provider;
  if (a.provider == "mock") {
    provider = std::make_unique<MockProvider>(a.mock_seed);
  } else {
    if (a.provider_config.empty()) throw UsageError("--provider http needs --provider-config FILE");
    provider = std::make_unique<HttpJsonProvider>(
        parse_http_provider_config(read_file(a.provider_config)), a.policy.request_timeout * 3);
  }

  // Ctrl-C: running sites finish and write meta.json, the rest are left for a rerun
  std::stop_source stop;
  g_interrupted.store(false);
  auto previous = std::signal(SIGINT, on_interrupt);
  std::jthread watcher([&stop](std::stop_token done) {
    while (!done.stop_requested()) {
      if (g_interrupted.load()) {
        stop.request_stop();
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  });
  BatchFetchReport report;
  try {
    report = batch_fetch(manifest, *provider, a.policy, a.images, stop.get_token());
  } catch (...) {
    std::signal(SIGINT, previous);
    throw;
  }
  watcher.request_stop();
  watcher.join();
  std::signal(SIGINT, previous);

  if (!a.report.empty()) write_file_atomic(a.report, batch_report_json(report));
  using S = FetchOutcome::Status;
  out << fmt::format("fetched {} sites, skipped {}, failed {}, cancelled {}\n", report.count(S::fetched),
                     report.count(S::skipped), report.count(S::failed), report.count(S::cancelled));
  for (const auto& o : report.outcomes) {
    if (o.status == S::failed) {
      out << fmt::format("  {}: {}{}\n", o.site_id, o.error, o.retryable ? " (retryable)" : "");
    }
  }
  return report.count(S::failed) + report.count(S::cancelled) == 0 ? kExitOk : kExitDomain;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fuses per-image class scores into site-level decisions and evaluates them.", "dimfuse"};
  app.set_version_flag("--version", std::string("dimfuse ") + DIMFUSE_VERSION);
  app.set_config("--config", "", "TOML-style file mirroring the command-line flags")
      ->check(CLI::ExistingFile);
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}))
      ->capture_default_str();

  const auto positive = CLI::PositiveNumber;
  const auto modes = CLI::IsMember({"softmax", "raw"});

  // fetch
  FetchArgs fa;
  auto* fetch = app.add_subcommand("fetch", "Download descriptive images for every manifest site");
  fa.manifest.add_to(fetch);
  fetch->add_option("--images", fa.images, "Destination root (<root>/<site_id>/NN.jpg)")->required();
  fetch->add_option("--provider", fa.provider, "Search provider")
      ->check(CLI::IsMember({"mock", "http"}))
      ->capture_default_str();
  fetch->add_option("--provider-config", fa.provider_config, "JSON config for the http provider")
      ->check(CLI::ExistingFile);
  fetch->add_option("--mock-seed", fa.mock_seed, "Seed for generated mock results")->capture_default_str();
  fetch->add_option("--max-images", fa.policy.max_images, "Images kept per site (1-20)")
      ->check(CLI::Range(1, 20))
      ->capture_default_str();
  fetch->add_option("--min-edge", fa.policy.min_edge_px, "Minimum thumbnail edge in pixels")
      ->check(positive)
      ->capture_default_str();
  fetch->add_option("--icon-max", fa.policy.icon_square_max, "Square results up to this edge count as icons")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  fetch->add_option("--allowed-mime", fa.mimes, "Accepted MIME type (repeatable; default jpeg, png, webp)");
  fetch->add_option("--timeout-ms", fa.timeout_ms, "Per-request timeout")->check(positive)->capture_default_str();
  fetch->add_option("--concurrency", fa.policy.max_concurrent, "Sites fetched in parallel")
      ->check(positive)
      ->capture_default_str();
  fetch->add_option("--host-delay-ms", fa.host_delay_ms, "Minimum gap between requests to one host")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  fetch->add_option("--query-mode", fa.query_mode, "Search by full url or by domain")
      ->check(CLI::IsMember({"url", "domain"}))
      ->capture_default_str();
  fetch->add_option("--report", fa.report, "Write the per-site batch report as JSON");

  // score
  ScoreArgs sa;
  auto* score = app.add_subcommand("score", "Produce per-image score matrices");
  sa.manifest.add_to(score);
  score->add_option("--images", sa.images, "Image root (<root>/<site_id>/NN.jpg)");
  score->add_option("--out", sa.out, "Output directory for <site_id>.json")->required();
  score->add_option("--scorer", sa.scorer, "Scorer backend")
      ->check(CLI::IsMember({"stub", "precomputed", "external"}))
      ->capture_default_str();
  score->add_option("--seed", sa.stub.seed, "Stub seed")->capture_default_str();
  score->add_option("--p", sa.stub.correct_rate, "Stub per-image correct rate")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  score->add_option("--concentration", sa.stub.concentration, "Stub winner boost")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  score->add_option("--class-rate", sa.class_rates, "Stub per-class rate override NAME=RATE (repeatable)");
  score->add_option("--precomputed", sa.precomputed, "Directory of precomputed score files")
      ->check(CLI::ExistingDirectory);
  score->add_option("--adapter", sa.adapter, "External adapter command (request on stdin)");
  score->add_option("--granularity", sa.granularity, "Adapter call per site or per image")
      ->check(CLI::IsMember({"per-site", "per-image"}))
      ->capture_default_str();
  score->add_option("--split", sa.split, "Split to score")
      ->check(CLI::IsMember({"train", "validation", "test", "all"}))
      ->capture_default_str();
  score->add_option("--mode", sa.mode, "Row validation mode")->check(modes)->capture_default_str();

  // classify
  ClassifyArgs ca;
  auto* classify = app.add_subcommand("classify", "Fuse one site's scores and print the decision");
  classify->add_option("--scores", ca.scores, "Score file, or directory holding <site>.json")
      ->required()
      ->check(CLI::ExistingPath);
  classify->add_option("--site", ca.site, "Site id");
  classify->add_option("--metric", ca.metrics, "Fusion metric such as S20 or A15 (repeatable; default all)");
  classify->add_option("--mode", ca.mode, "Row validation mode")->check(modes)->capture_default_str();
  classify->add_option("--format", ca.format, "table or json")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();

  // evaluate
  EvaluateArgs ea;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Accuracy and confusion for all 13 metrics");
  ea.manifest.add_to(evaluate_cmd);
  evaluate_cmd->add_option("--scores", ea.scores, "Score directory")->required()->check(CLI::ExistingDirectory);
  evaluate_cmd->add_option("--mode", ea.mode, "Row validation mode")->check(modes)->capture_default_str();
  evaluate_cmd->add_option("--format", ea.format, "table, csv or json")->capture_default_str();
  evaluate_cmd->add_option("--output,-o", ea.output, "Write to a file instead of stdout");
  evaluate_cmd->add_option("--jobs,-j", ea.jobs, "Worker threads")->check(positive);

  // sweep
  SweepArgs wa;
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate every epoch_NNN snapshot");
  wa.manifest.add_to(sweep_cmd);
  sweep_cmd->add_option("--snapshots", wa.snapshots, "Directory holding epoch_NNN/")
      ->required()
      ->check(CLI::ExistingDirectory);
  sweep_cmd->add_option("--mode", wa.mode, "Row validation mode")->check(modes)->capture_default_str();
  sweep_cmd->add_option("--format", wa.format, "table, csv, json or plot-series")->capture_default_str();
  sweep_cmd->add_option("--output,-o", wa.output, "Write to a file instead of stdout");
  sweep_cmd->add_option("--jobs,-j", wa.jobs, "Worker threads")->check(positive);

  // report
  ReportArgs ra;
  auto* report = app.add_subcommand("report", "Re-render saved results or build a comparison table");
  report->add_option("--input", ra.input, "Report or series JSON")->check(CLI::ExistingFile);
  report->add_option("--compare", ra.compare, "Comparison row NAME=report.json (repeatable)");
  report->add_option("--column", ra.columns, "Metric column for comparisons (repeatable; default S20 H20 A20)");
  report->add_option("--baselines", ra.baselines, "CSV row,column,accuracy of external cells")
      ->check(CLI::ExistingFile);
  report->add_option("--format", ra.format, "table, csv, json or plot-series")->capture_default_str();
  report->add_option("--output,-o", ra.output, "Write to a file instead of stdout");

  // stats
  StatsArgs ta;
  auto* stats = app.add_subcommand("stats", "Split counts, languages and image-shape statistics");
  ta.manifest.add_to(stats);
  stats->add_option("--images", ta.images, "Image root to scan (optional)");
  stats->add_option("--max-ratio", ta.scan.max_ratio_percent, "Overflow bin of the 100*w/h histogram")
      ->check(positive)
      ->capture_default_str();
  stats->add_option("--large-edge", ta.scan.large_edge_px, "Edge threshold for the large-image count")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  stats->add_option("--format", ta.format, "json or csv")->capture_default_str();
  stats->add_option("--output,-o", ta.output, "Write to a file instead of stdout");
  stats->add_option("--jobs,-j", ta.scan.jobs, "Worker threads")->check(positive);

  // synth
  SynthArgs ya;
  auto* synth = app.add_subcommand("synth", "Generate a planted synthetic dataset");
  synth->add_option("--out", ya.out, "Output directory")->required();
  synth->add_option("--sites", ya.params.sites, "Number of sites")->check(positive)->capture_default_str();
  synth->add_option("--classes", ya.params.classes, "Number of classes")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  synth->add_option("--images", ya.params.images, "Images per site")
      ->check(CLI::Range(1, 20))
      ->capture_default_str();
  synth->add_option("--p", ya.params.correct_rate, "Per-image correct probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  synth->add_option("--concentration", ya.params.concentration, "Winner boost")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth->add_option("--seed", ya.params.seed, "Seed")->capture_default_str();
  synth->add_option("--split", ya.split, "Split assigned to every site")
      ->check(CLI::IsMember({"train", "validation", "test"}))
      ->capture_default_str();
  synth->add_flag("--with-images", ya.params.write_images, "Also write placeholder NN.jpg files");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    set_log_level(log_level);
    if (fetch->parsed()) return run_fetch(fa, out);
    if (score->parsed()) return run_score(sa, out);
    if (classify->parsed()) return run_classify(ca, out);
    if (evaluate_cmd->parsed()) return run_evaluate(ea, out);
    if (sweep_cmd->parsed()) return run_sweep(wa, out);
    if (report->parsed()) return run_report(ra, out);
    if (stats->parsed()) return run_stats(ta, out);
    if (synth->parsed()) return run_synth(ya, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace dimfuse::cli
