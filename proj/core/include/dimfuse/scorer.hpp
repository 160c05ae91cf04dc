#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dimfuse/dataset.hpp"
#include "dimfuse/error.hpp"
#include "dimfuse/score_io.hpp"
#include "dimfuse/score_matrix.hpp"

namespace dimfuse {

/// Deterministic synthetic scorer.
///
/// For every (site, ordinal) a keyed hash seeds an independent stream. The
/// image's winning class is the site's true class with probability
/// `correct_rate` (or the per-class override), otherwise a uniformly chosen
/// other class. C values ~ Exp(1) are sorted descending; the largest one,
/// boosted by concentration * (0.25 + Exp(1)), goes to the winner. On a miss
/// the true class receives the runner-up value, and the rest follow in
/// ascending class order. The row is normalised to sum to 1.
struct StubParams {
  std::uint64_t seed = 42;
  double correct_rate = 0.6;
  double concentration = 0.5;
  std::map<std::string, double> class_rate;  // label name -> correct rate override
};

struct PrecomputedParams {
  std::filesystem::path directory;  // <dir>/<site_id>.json
};

struct ExternalParams {
  enum class Granularity { per_site, per_image };
  std::string command;  // run via /bin/sh -c; request on stdin, response on stdout
  Granularity granularity = Granularity::per_site;
};

using ScorerSpec = std::variant<StubParams, PrecomputedParams, ExternalParams>;

class ScorerError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// One stub row; depends only on (params, site_id, ordinal, true class).
std::vector<double> stub_row(const StubParams& params, std::string_view site_id, int ordinal,
                             const ClassLabel& truth, std::size_t classes);

/// Stub matrix for explicit ordinals (no image directory needed).
ScoreMatrix stub_matrix(const StubParams& params, const WebSiteRecord& record,
                        const std::vector<int>& ordinals, const LabelSet& labels);

/// Scores the NN.jpg images present in `image_dir`.
/// Throws NoEvidenceError when the directory holds no images, ScorerError
/// when the external adapter fails, ValidationError for invalid output.
ScoreMatrix score_site(const WebSiteRecord& record, const std::filesystem::path& image_dir,
                       const LabelSet& labels, const ScorerSpec& spec,
                       SchemaMode mode = SchemaMode::softmax);

/// JSON request sent to an external adapter.
std::string adapter_request_json(std::string_view site_id,
                                 const std::vector<std::filesystem::path>& image_paths,
                                 const LabelSet& labels);

struct ScoreFailure {
  std::string site_id;
  std::string error;
};

struct ScoreSummary {
  std::size_t sites_scored = 0;
  std::size_t images_scored = 0;
  std::vector<ScoreFailure> failures;
};

struct ScoreDatasetOptions {
  std::optional<Split> split;  // nullopt -> every record
  SchemaMode mode = SchemaMode::softmax;
};

/// Writes <out_dir>/<site_id>.json for every selected record; failures are
/// collected and the batch continues.
ScoreSummary score_dataset(const DatasetManifest& manifest, const std::filesystem::path& images_root,
                           const ScorerSpec& spec, const std::filesystem::path& out_dir,
                           const ScoreDatasetOptions& options = {});

}  // namespace dimfuse
