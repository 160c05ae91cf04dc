#include "dimfuse/synth.hpp"

#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "dimfuse/fsutil.hpp"
#include "dimfuse/image_stats.hpp"
#include "dimfuse/score_io.hpp"
#include "dimfuse/scorer.hpp"

namespace dimfuse {

namespace fs = std::filesystem;

DatasetManifest synthesize(const SynthParams& params, const fs::path& out) {
  if (params.sites == 0) throw std::invalid_argument("synth needs at least one site");
  if (params.images < 1 || params.images > kMaxImages) {
    throw std::invalid_argument(fmt::format("images must be in 1..{}", kMaxImages));
  }
  if (params.correct_rate < 0.0 || params.correct_rate > 1.0) {
    throw std::invalid_argument("correct rate must be in [0,1]");
  }

  DatasetManifest manifest{"synthetic", synthetic_labels(params.classes), {}};
  const int width = static_cast<int>(std::to_string(params.sites).size());
  for (std::size_t i = 0; i < params.sites; ++i) {
    const std::string id = fmt::format("synth_{:0{}d}", i + 1, std::max(width, 4));
    manifest.records.push_back(WebSiteRecord{id, fmt::format("https://{}.example.com/", id),
                                             manifest.labels.at(i % params.classes), params.split,
                                             "en", std::nullopt, std::nullopt});
  }
  write_manifest(manifest, out / "manifest.csv", ManifestFormat::csv);

  std::vector<int> ordinals(static_cast<std::size_t>(params.images));
  std::iota(ordinals.begin(), ordinals.end(), 1);
  const StubParams stub{params.seed, params.correct_rate, params.concentration, {}};
  const std::string placeholder = params.write_images ? encode_placeholder_jpeg(32, 24) : "";

  for (const auto& record : manifest.records) {
    write_score_document(
        ScoreDocument{stub_matrix(stub, record, ordinals, manifest.labels), manifest.labels,
                      SchemaMode::softmax},
        out / "scores" / (record.site_id + ".json"));
    if (params.write_images) {
      for (int ordinal : ordinals) {
        write_file_atomic(out / "images" / record.site_id / image_name_for_ordinal(ordinal),
                          placeholder);
      }
    }
  }
  return manifest;
}

}  // namespace dimfuse
