#include "dimfuse/score_io.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "dimfuse/error.hpp"
#include "dimfuse/fsutil.hpp"

namespace dimfuse {

namespace fs = std::filesystem;
using nlohmann::json;

ScoreDocument parse_score_document(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("score document: {}", e.what()));
  }
  try {
    if (!doc.is_object()) throw ValidationError("score document must be a JSON object");
    LabelSet labels(doc.at("labels").get<std::vector<std::string>>());
    SchemaMode mode = SchemaMode::softmax;
    if (doc.contains("mode")) mode = parse_schema_mode(doc.at("mode").get<std::string>());

    ScoreMatrix matrix(doc.at("site_id").get<std::string>(), labels.size());
    for (const auto& row : doc.at("rows")) {
      const auto scores = row.at("scores").get<std::vector<double>>();
      if (scores.size() != labels.size()) {
        throw ValidationError(fmt::format("ordinal {} has {} scores for {} labels",
                                          row.at("ordinal").dump(), scores.size(),
                                          labels.size()));
      }
      matrix.append_row(row.at("ordinal").get<int>(), scores);
    }
    return ScoreDocument{std::move(matrix), std::move(labels), mode};
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("score document: {}", e.what()));
  } catch (const std::invalid_argument& e) {
    throw ValidationError(fmt::format("score document: {}", e.what()));
  }
}

std::string serialize_score_document(const ScoreDocument& doc) {
  const auto& m = doc.matrix;
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto scores = m.row(r);
    rows.push_back({{"ordinal", m.ordinal(r)},
                    {"scores", std::vector<double>(scores.begin(), scores.end())}});
  }
  json out = {{"site_id", m.site_id()},
              {"labels", doc.labels.names()},
              {"mode", to_string(doc.mode)},
              {"rows", std::move(rows)}};
  // nlohmann prints the shortest representation that parses back to the same double
  return out.dump(1) + "\n";
}

void write_score_document(const ScoreDocument& doc, const fs::path& path) {
  write_file_atomic(path, serialize_score_document(doc));
}

std::string serialize_scores_csv(const std::vector<ScoreMatrix>& matrices) {
  const std::size_t classes = matrices.empty() ? 0 : matrices.front().classes();
  std::vector<std::string> header = {"site_id", "ordinal"};
  for (std::size_t c = 1; c <= classes; ++c) header.push_back(fmt::format("score_{}", c));
  std::string out = csv::join(header) + "\n";
  for (const auto& m : matrices) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      out += csv::escape(m.site_id());
      out += fmt::format(",{}", m.ordinal(r));
      for (double v : m.row(r)) out += fmt::format(",{:.17g}", v);
      out += '\n';
    }
  }
  return out;
}

std::vector<ScoreMatrix> parse_scores_csv(std::string_view text, std::size_t classes) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw ValidationError("score CSV is empty");
  if (rows.front().fields.size() != classes + 2) {
    throw ValidationError(fmt::format("score CSV header has {} columns, expected {}",
                                      rows.front().fields.size(), classes + 2));
  }
  auto number = [](const std::string& field, std::size_t line, auto& value) {
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw ValidationError(fmt::format("line {}: '{}' is not a number", line, field));
    }
  };

  std::vector<ScoreMatrix> out;
  std::vector<double> scores(classes);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.fields.size() != classes + 2) {
      throw ValidationError(fmt::format("line {}: expected {} fields, got {}", row.line,
                                        classes + 2, row.fields.size()));
    }
    const std::string& site = row.fields[0];
    if (out.empty() || out.back().site_id() != site) {
      if (std::any_of(out.begin(), out.end(), [&](auto& m) { return m.site_id() == site; })) {
        throw ValidationError(fmt::format("line {}: rows for '{}' are not contiguous", row.line,
                                          site));
      }
      out.emplace_back(site, classes);
    }
    int ordinal = 0;
    number(row.fields[1], row.line, ordinal);
    for (std::size_t c = 0; c < classes; ++c) number(row.fields[c + 2], row.line, scores[c]);
    out.back().append_row(ordinal, scores);
  }
  return out;
}

std::string_view to_string(LoadIssue::Kind kind) {
  switch (kind) {
    case LoadIssue::Kind::unknown_site: return "unknown_site";
    case LoadIssue::Kind::invalid: return "invalid";
    case LoadIssue::Kind::unreadable: return "unreadable";
  }
  return "invalid";
}

ScoreLoadResult load_scores(const fs::path& dir, const DatasetManifest& manifest,
                            SchemaMode mode) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw DomainError(fmt::format("score directory '{}' does not exist", dir.string()));
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".json" || ext == ".csv")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  ScoreLoadResult result;
  auto issue = [&](LoadIssue::Kind kind, const fs::path& file, std::string site,
                   std::string message) {
    result.issues.push_back(
        LoadIssue{kind, file.filename().string(), std::move(site), std::move(message)});
  };

  auto accept = [&](const fs::path& file, ScoreMatrix matrix, const LabelSet& labels) {
    const std::string site = matrix.site_id();
    if (!manifest.find(site)) {
      issue(LoadIssue::Kind::unknown_site, file, site, "site not in manifest");
      return;
    }
    if (labels != manifest.labels) {
      issue(LoadIssue::Kind::invalid, file, site, "labels differ from the manifest label set");
      return;
    }
    if (matrix.empty()) {
      // zero images is a data gap, not a bad file; evaluate() skips it as "no evidence"
      result.matrices.emplace(site, std::move(matrix));
      return;
    }
    auto verdict = validate_matrix(matrix, manifest.labels, mode);
    if (!verdict.valid()) {
      issue(LoadIssue::Kind::invalid, file, site, verdict.summary());
      return;
    }
    if (result.matrices.contains(site)) {
      issue(LoadIssue::Kind::invalid, file, site, "duplicate score matrix for site");
      return;
    }
    result.matrices.emplace(site, std::move(matrix));
  };

  for (const auto& file : files) {
    try {
      const std::string text = read_file(file);
      if (file.extension() == ".json") {
        auto doc = parse_score_document(text);
        accept(file, std::move(doc.matrix), doc.labels);
      } else {
        for (auto& m : parse_scores_csv(text, manifest.labels.size())) {
          accept(file, std::move(m), manifest.labels);
        }
      }
    } catch (const DomainError& e) {
      const std::string site = file.extension() == ".json" ? file.stem().string() : "";
      issue(LoadIssue::Kind::unreadable, file, site, e.what());
    }
  }
  return result;
}

}  // namespace dimfuse
