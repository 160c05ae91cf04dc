#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dimfuse/labels.hpp"

namespace dimfuse {

enum class Split { train, validation, test };

std::string_view to_string(Split split);
/// Throws ValidationError for anything other than train/validation/test.
Split parse_split(std::string_view text);

struct WebSiteRecord {
  std::string site_id;
  std::string url;
  ClassLabel label;
  Split split = Split::test;
  std::optional<std::string> language;
  std::optional<std::string> screenshot_path;
  std::optional<std::string> text_path;

  friend bool operator==(const WebSiteRecord&, const WebSiteRecord&) = default;
};

/// True when the id can be used as a directory name (no separators, no dot-only names).
bool is_directory_safe(std::string_view site_id);

struct DatasetManifest {
  std::string name;
  LabelSet labels;
  std::vector<WebSiteRecord> records;

  std::map<Split, std::size_t> split_counts() const;
  const WebSiteRecord* find(std::string_view site_id) const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

enum class ManifestFormat { csv, json };

/// Picks the format from the file extension (.json, else csv).
ManifestFormat manifest_format_for(const std::filesystem::path& path);

/// Parses and validates a manifest.
///
/// CSV manifests carry no label list: pass `labels` to fix the column
/// order, otherwise the sorted set of label names in the file is used.
/// Throws ValidationError naming the row and field for malformed input,
/// duplicate site ids, unknown labels, or an empty file ("no records").
DatasetManifest parse_manifest(const std::filesystem::path& path, ManifestFormat format,
                               const std::optional<LabelSet>& labels = std::nullopt);
DatasetManifest parse_manifest_text(std::string_view text, ManifestFormat format,
                                    const std::optional<LabelSet>& labels = std::nullopt,
                                    std::string name = "manifest");

std::string serialize_manifest(const DatasetManifest& manifest, ManifestFormat format);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path,
                    ManifestFormat format);

}  // namespace dimfuse
