#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dimfuse/dataset.hpp"
#include "dimfuse/labels.hpp"
#include "dimfuse/score_matrix.hpp"

namespace dimfuse {

/// One site's interchange document:
///   {"site_id", "labels": [...], "mode": "softmax"|"raw",
///    "rows": [{"ordinal": n, "scores": [...]}, ...]}
struct ScoreDocument {
  ScoreMatrix matrix;
  LabelSet labels;
  SchemaMode mode = SchemaMode::softmax;
};

/// Structural parse only (shape, types); run validate_matrix() for contents.
/// Throws ValidationError on malformed documents.
ScoreDocument parse_score_document(std::string_view text);
std::string serialize_score_document(const ScoreDocument& doc);
void write_score_document(const ScoreDocument& doc, const std::filesystem::path& path);

/// Long-form CSV: header site_id,ordinal,score_1..score_C; one line per image.
std::string serialize_scores_csv(const std::vector<ScoreMatrix>& matrices);
std::vector<ScoreMatrix> parse_scores_csv(std::string_view text, std::size_t classes);

struct LoadIssue {
  enum class Kind { unknown_site, invalid, unreadable };
  Kind kind;
  std::string file;
  std::string site_id;
  std::string message;
};

std::string_view to_string(LoadIssue::Kind kind);

struct ScoreLoadResult {
  std::map<std::string, ScoreMatrix> matrices;
  std::vector<LoadIssue> issues;
};

/// Loads every *.json and *.csv file in `dir` (sorted by name). Each matrix
/// is validated against the manifest labels; invalid files and files for
/// sites missing from the manifest go to the issue register instead of
/// aborting. A document with zero rows is kept as an empty matrix.
/// Throws DomainError only when `dir` does not exist.
ScoreLoadResult load_scores(const std::filesystem::path& dir, const DatasetManifest& manifest,
                            SchemaMode mode);

}  // namespace dimfuse
