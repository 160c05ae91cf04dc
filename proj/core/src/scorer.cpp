#include "dimfuse/scorer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include "dimfuse/fsutil.hpp"
#include "log.hpp"

namespace dimfuse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// splitmix64 stream keyed by FNV-1a over (seed, site_id, ordinal).
class KeyedStream {
 public:
  KeyedStream(std::uint64_t seed, std::string_view site_id, int ordinal) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](unsigned char byte) {
      h ^= byte;
      h *= 0x100000001b3ULL;
    };
    for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(seed >> (8 * i)));
    for (char ch : site_id) mix(static_cast<unsigned char>(ch));
    mix(0);
    for (int i = 0; i < 4; ++i) mix(static_cast<unsigned char>(static_cast<unsigned>(ordinal) >> (8 * i)));
    state_ = h;
  }

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double exponential() { return -std::log1p(-uniform()); }

 private:
  std::uint64_t state_ = 0;
};

struct PipeCloser {
  void operator()(std::FILE* f) const {
    if (f) ::pclose(f);
  }
};

/// Runs `command` with `input` on stdin and returns stdout.
std::string run_adapter(const std::string& command, const std::string& input) {
  std::string tmpl = (fs::temp_directory_path() / "dimfuse-request-XXXXXX").string();
  const int fd = ::mkstemp(tmpl.data());
  if (fd < 0) throw ScorerError("cannot create adapter request file");
  ::close(fd);
  const fs::path request_path = tmpl;
  struct Cleanup {
    fs::path path;
    ~Cleanup() {
      std::error_code ec;
      fs::remove(path, ec);
    }
  } cleanup{request_path};
  write_file_atomic(request_path, input);

  const std::string shell = fmt::format("( {} ) < '{}'", command, request_path.string());
  std::FILE* pipe = ::popen(shell.c_str(), "r");
  if (!pipe) throw ScorerError(fmt::format("cannot start adapter '{}'", command));
  std::string output;
  std::array<char, 4096> buffer{};
  std::size_t n = 0;
  while ((n = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) output.append(buffer.data(), n);
  const int status = ::pclose(pipe);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const int code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    throw ScorerError(fmt::format("adapter '{}' exited with status {}", command, code));
  }
  return output;
}

ScoreMatrix accept_document(const ScoreDocument& doc, const WebSiteRecord& record,
                            const LabelSet& labels, SchemaMode mode, std::string_view source) {
  if (doc.matrix.site_id() != record.site_id) {
    throw ValidationError(fmt::format("{} returned site '{}' for '{}'", source,
                                      doc.matrix.site_id(), record.site_id));
  }
  if (doc.labels != labels) {
    throw ValidationError(fmt::format("{} labels differ from the dataset labels", source));
  }
  if (doc.matrix.empty()) throw NoEvidenceError(record.site_id);
  auto verdict = validate_matrix(doc.matrix, labels, mode);
  if (!verdict.valid()) {
    throw ValidationError(fmt::format("{} output for '{}' is invalid: {}", source, record.site_id,
                                      verdict.summary()));
  }
  return doc.matrix;
}

ScoreMatrix score_external(const ExternalParams& params, const WebSiteRecord& record,
                           const fs::path& image_dir, const std::vector<int>& ordinals,
                           const LabelSet& labels, SchemaMode mode) {
  auto call = [&](const std::vector<int>& batch) {
    std::vector<fs::path> paths;
    for (int ordinal : batch) paths.push_back(image_dir / image_name_for_ordinal(ordinal));
    const std::string response =
        run_adapter(params.command, adapter_request_json(record.site_id, paths, labels));
    ScoreMatrix m = accept_document(parse_score_document(response), record, labels, mode,
                                    "adapter");
    if (m.ordinals() != batch) {
      throw ValidationError(fmt::format("adapter rows for '{}' do not match the requested ordinals",
                                        record.site_id));
    }
    return m;
  };

  if (params.granularity == ExternalParams::Granularity::per_site) return call(ordinals);

  ScoreMatrix out(record.site_id, labels.size());
  for (int ordinal : ordinals) {
    ScoreMatrix one = call({ordinal});
    out.append_row(ordinal, one.row(0));
  }
  return out;
}

}  // namespace

std::vector<double> stub_row(const StubParams& params, std::string_view site_id, int ordinal,
                             const ClassLabel& truth, std::size_t classes) {
  if (classes < 2) throw std::invalid_argument("stub scorer needs at least 2 classes");
  KeyedStream stream(params.seed, site_id, ordinal);

  double rate = params.correct_rate;
  if (auto it = params.class_rate.find(truth.name); it != params.class_rate.end()) rate = it->second;

  const std::size_t t = truth.index;
  const double u_hit = stream.uniform();
  const double u_other = stream.uniform();
  std::size_t winner = t;
  if (u_hit >= rate) {
    auto other = std::min(static_cast<std::size_t>(u_other * static_cast<double>(classes - 1)),
                          classes - 2);
    winner = other >= t ? other + 1 : other;
  }

  std::vector<double> values(classes);
  for (auto& v : values) v = stream.exponential();
  std::sort(values.begin(), values.end(), std::greater<>());
  values[0] += params.concentration * (0.25 + stream.exponential());

  std::vector<double> row(classes, 0.0);
  std::size_t next = 0;
  row[winner] = values[next++];
  if (winner != t) row[t] = values[next++];
  for (std::size_t c = 0; c < classes; ++c) {
    if (c != winner && c != t) row[c] = values[next++];
  }
  double sum = 0.0;
  for (double v : row) sum += v;
  for (auto& v : row) v /= sum;
  return row;
}

ScoreMatrix stub_matrix(const StubParams& params, const WebSiteRecord& record,
                        const std::vector<int>& ordinals, const LabelSet& labels) {
  ScoreMatrix m(record.site_id, labels.size());
  for (int ordinal : ordinals) {
    m.append_row(ordinal, stub_row(params, record.site_id, ordinal, record.label, labels.size()));
  }
  return m;
}

std::string adapter_request_json(std::string_view site_id, const std::vector<fs::path>& image_paths,
                                 const LabelSet& labels) {
  json paths = json::array();
  for (const auto& p : image_paths) paths.push_back(p.string());
  json request = {{"site_id", site_id}, {"image_paths", std::move(paths)}, {"labels", labels.names()}};
  return request.dump() + "\n";
}

ScoreMatrix score_site(const WebSiteRecord& record, const fs::path& image_dir,
                       const LabelSet& labels, const ScorerSpec& spec, SchemaMode mode) {
  if (const auto* precomputed = std::get_if<PrecomputedParams>(&spec)) {
    const fs::path file = precomputed->directory / (record.site_id + ".json");
    std::error_code ec;
    if (!fs::is_regular_file(file, ec)) {
      throw ScorerError(fmt::format("no precomputed scores at '{}'", file.string()));
    }
    return accept_document(parse_score_document(read_file(file)), record, labels, mode,
                           "precomputed file");
  }

  const std::vector<int> ordinals = list_image_ordinals(image_dir);
  if (ordinals.empty()) throw NoEvidenceError(record.site_id);

  if (const auto* stub = std::get_if<StubParams>(&spec)) {
    return stub_matrix(*stub, record, ordinals, labels);
  }
  return score_external(std::get<ExternalParams>(spec), record, image_dir, ordinals, labels, mode);
}

ScoreSummary score_dataset(const DatasetManifest& manifest, const fs::path& images_root,
                           const ScorerSpec& spec, const fs::path& out_dir,
                           const ScoreDatasetOptions& options) {
  ScoreSummary summary;
  fs::create_directories(out_dir);
  for (const auto& record : manifest.records) {
    if (options.split && record.split != *options.split) continue;
    try {
      ScoreMatrix m = score_site(record, images_root / record.site_id, manifest.labels, spec,
                                 options.mode);
      summary.images_scored += m.rows();
      write_score_document(ScoreDocument{std::move(m), manifest.labels, options.mode},
                           out_dir / (record.site_id + ".json"));
      ++summary.sites_scored;
    } catch (const DomainError& e) {
      log::get()->warn("module=scorer event=site_failed site_id={} error=\"{}\"", record.site_id,
                       e.what());
      summary.failures.push_back(ScoreFailure{record.site_id, e.what()});
    }
  }
  return summary;
}

}  // namespace dimfuse
