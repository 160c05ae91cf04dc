#include "dimfuse/dataset.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "dimfuse/error.hpp"
#include "dimfuse/fsutil.hpp"

namespace dimfuse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kCsvColumns = {"site_id",  "url",        "label",
                                              "split",    "language",   "screenshot_path",
                                              "text_path"};

std::optional<std::string> optional_field(const std::string& value) {
  if (value.empty()) return std::nullopt;
  return value;
}

struct RawRecord {
  std::string where;  // "row 3" / "record 2", for error messages
  std::string site_id, url, label, split;
  std::optional<std::string> language, screenshot_path, text_path;
};

DatasetManifest build(std::string name, std::vector<RawRecord> raw,
                      const std::optional<LabelSet>& given_labels) {
  if (raw.empty()) throw ValidationError("no records");

  LabelSet labels;
  if (given_labels) {
    labels = *given_labels;
  } else {
    std::set<std::string> names;
    for (const auto& r : raw) {
      if (!r.label.empty()) names.insert(r.label);
    }
    labels = LabelSet(std::vector<std::string>(names.begin(), names.end()));
  }

  DatasetManifest manifest{std::move(name), labels, {}};
  std::unordered_set<std::string> seen;
  for (auto& r : raw) {
    auto fail = [&](std::string_view field, const std::string& why) {
      throw ValidationError(fmt::format("{}, field '{}': {}", r.where, field, why));
    };
    if (r.site_id.empty()) fail("site_id", "empty");
    if (!is_directory_safe(r.site_id)) fail("site_id", "'" + r.site_id + "' is not directory-safe");
    if (!seen.insert(r.site_id).second) fail("site_id", "duplicate '" + r.site_id + "'");
    if (r.url.empty()) fail("url", "empty");
    auto label = labels.find(r.label);
    if (!label) fail("label", "unknown label '" + r.label + "'");
    Split split = Split::test;
    try {
      split = parse_split(r.split);
    } catch (const ValidationError& e) {
      fail("split", e.what());
    }
    manifest.records.push_back(WebSiteRecord{std::move(r.site_id), std::move(r.url), *label,
                                             split, std::move(r.language),
                                             std::move(r.screenshot_path),
                                             std::move(r.text_path)});
  }
  return manifest;
}

std::vector<RawRecord> raw_from_csv(std::string_view text) {
  auto rows = csv::parse(text);
  if (rows.empty()) throw ValidationError("no records");
  const auto& header = rows.front().fields;
  std::vector<int> column(kCsvColumns.size(), -1);
  for (std::size_t i = 0; i < header.size(); ++i) {
    auto it = std::find(kCsvColumns.begin(), kCsvColumns.end(), header[i]);
    if (it != kCsvColumns.end()) column[it - kCsvColumns.begin()] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (column[i] < 0) {
      throw ValidationError(fmt::format("header is missing required column '{}'", kCsvColumns[i]));
    }
  }

  std::vector<RawRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& fields = rows[r].fields;
    if (fields.size() != header.size()) {
      throw ValidationError(fmt::format("row {} (line {}), field 'row': expected {} fields, got {}",
                                        r, rows[r].line, header.size(), fields.size()));
    }
    auto get = [&](std::size_t i) -> std::string {
      return column[i] < 0 ? std::string() : fields[static_cast<std::size_t>(column[i])];
    };
    out.push_back(RawRecord{fmt::format("row {} (line {})", r, rows[r].line), get(0), get(1),
                            get(2), get(3), optional_field(get(4)), optional_field(get(5)),
                            optional_field(get(6))});
  }
  return out;
}

std::vector<RawRecord> raw_from_json(const json& doc, std::optional<LabelSet>& labels,
                                     std::string& name) {
  if (!doc.is_object()) throw ValidationError("manifest JSON must be an object");
  if (doc.contains("name")) name = doc.at("name").get<std::string>();
  if (doc.contains("labels") && !labels) {
    labels = LabelSet(doc.at("labels").get<std::vector<std::string>>());
  }
  if (!doc.contains("records") || !doc.at("records").is_array()) {
    throw ValidationError("no records");
  }
  std::vector<RawRecord> out;
  std::size_t i = 0;
  for (const auto& rec : doc.at("records")) {
    ++i;
    const std::string where = fmt::format("record {}", i);
    auto str = [&](const char* key, bool required) -> std::optional<std::string> {
      if (!rec.contains(key) || rec.at(key).is_null()) {
        if (required) throw ValidationError(fmt::format("{}, field '{}': missing", where, key));
        return std::nullopt;
      }
      if (!rec.at(key).is_string()) {
        throw ValidationError(fmt::format("{}, field '{}': expected a string", where, key));
      }
      return optional_field(rec.at(key).get<std::string>());
    };
    out.push_back(RawRecord{where, str("site_id", true).value_or(""), str("url", true).value_or(""),
                            str("label", true).value_or(""), str("split", true).value_or(""),
                            str("language", false), str("screenshot_path", false),
                            str("text_path", false)});
  }
  return out;
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "test";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "validation") return Split::validation;
  if (text == "test") return Split::test;
  throw ValidationError(fmt::format("unknown split '{}'", text));
}

bool is_directory_safe(std::string_view site_id) {
  if (site_id.empty() || site_id == "." || site_id == "..") return false;
  return site_id.find_first_of("/\\:\0*?\"<>|", 0, 10) == std::string_view::npos;
}

std::map<Split, std::size_t> DatasetManifest::split_counts() const {
  std::map<Split, std::size_t> counts{{Split::train, 0}, {Split::validation, 0}, {Split::test, 0}};
  for (const auto& r : records) ++counts[r.split];
  return counts;
}

const WebSiteRecord* DatasetManifest::find(std::string_view site_id) const {
  for (const auto& r : records) {
    if (r.site_id == site_id) return &r;
  }
  return nullptr;
}

ManifestFormat manifest_format_for(const fs::path& path) {
  return path.extension() == ".json" ? ManifestFormat::json : ManifestFormat::csv;
}

DatasetManifest parse_manifest_text(std::string_view text, ManifestFormat format,
                                    const std::optional<LabelSet>& labels, std::string name) {
  if (format == ManifestFormat::csv) return build(std::move(name), raw_from_csv(text), labels);

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("manifest JSON: {}", e.what()));
  }
  std::optional<LabelSet> effective = labels;
  auto raw = raw_from_json(doc, effective, name);
  return build(std::move(name), std::move(raw), effective);
}

DatasetManifest parse_manifest(const fs::path& path, ManifestFormat format,
                               const std::optional<LabelSet>& labels) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw DomainError(fmt::format("manifest '{}' does not exist", path.string()));
  }
  return parse_manifest_text(read_file(path), format, labels, path.stem().string());
}

std::string serialize_manifest(const DatasetManifest& manifest, ManifestFormat format) {
  if (format == ManifestFormat::csv) {
    std::string out = csv::join(kCsvColumns) + "\n";
    for (const auto& r : manifest.records) {
      out += csv::join({r.site_id, r.url, r.label.name, std::string(to_string(r.split)),
                        r.language.value_or(""), r.screenshot_path.value_or(""),
                        r.text_path.value_or("")}) +
             "\n";
    }
    return out;
  }
  json records = json::array();
  for (const auto& r : manifest.records) {
    json rec = {{"site_id", r.site_id},
                {"url", r.url},
                {"label", r.label.name},
                {"split", to_string(r.split)}};
    if (r.language) rec["language"] = *r.language;
    if (r.screenshot_path) rec["screenshot_path"] = *r.screenshot_path;
    if (r.text_path) rec["text_path"] = *r.text_path;
    records.push_back(std::move(rec));
  }
  json doc = {{"name", manifest.name}, {"labels", manifest.labels.names()}, {"records", records}};
  return doc.dump(1) + "\n";
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path, ManifestFormat format) {
  write_file_atomic(path, serialize_manifest(manifest, format));
}

}  // namespace dimfuse
