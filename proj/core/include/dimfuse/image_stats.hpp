#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dimfuse/dataset.hpp"

namespace dimfuse {

struct ImageSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// Reads width/height from a JPEG or PNG header without decoding pixels.
/// The format is sniffed from the content, not the extension.
/// Throws DomainError for unreadable or unsupported files.
ImageSize read_image_size(const std::filesystem::path& path);

/// Encodes a flat grey baseline JPEG (used for placeholder and mock thumbnails).
std::string encode_placeholder_jpeg(int width, int height, std::uint8_t shade = 128);

struct RatioBin {
  int base_percent = 0;  // bin covers [base, base + 10); the last bin is open-ended
  std::uint64_t count = 0;

  friend bool operator==(const RatioBin&, const RatioBin&) = default;
};

struct ImageSetStats {
  std::uint64_t total_images = 0;
  int max_ratio_percent = 300;
  /// Bins of width 10 in 100*width/height; the last bin (base = max) collects everything above.
  std::vector<RatioBin> wh_ratio_histogram;
  /// Images with both edges strictly greater than the threshold (224 by default).
  std::uint64_t min_dim_gt_224_count = 0;
  std::map<std::string, std::uint64_t> per_site_image_counts;
  std::vector<std::pair<std::string, std::string>> corrupt;  // (site/NN.jpg, error)
};

struct ScanOptions {
  int max_ratio_percent = 300;  // multiple of 10
  int large_edge_px = 224;
  unsigned jobs = 1;
};

/// Histogram bin base for an image: floor(10 * w / h) * 10, capped at max.
int ratio_bin_base(ImageSize size, int max_ratio_percent);

/// Scans <root>/<site_id>/NN.jpg for every manifest record. Only headers are
/// read. A missing or empty site directory counts 0 images.
ImageSetStats scan_image_sets(const std::filesystem::path& root, const DatasetManifest& manifest,
                              const ScanOptions& options = {});

/// (language, count) descending by count, ties by name; missing -> "unknown".
std::vector<std::pair<std::string, std::uint64_t>> language_table(const DatasetManifest& manifest);

/// bin_base_percent,count
std::string histogram_csv(const ImageSetStats& stats);
/// Image stats, split counts and language table as one JSON document.
std::string stats_json(const DatasetManifest& manifest, const std::optional<ImageSetStats>& images);
/// Sectioned CSV: split counts, language table, then the histogram when present.
std::string stats_csv(const DatasetManifest& manifest, const std::optional<ImageSetStats>& images);

}  // namespace dimfuse
