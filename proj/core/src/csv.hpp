#pragma once

// Minimal RFC 4180 reader/writer used by the manifest, score and report
// formats. Quoted fields may contain commas, quotes ("") and newlines.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dimfuse::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the row starts
  std::vector<std::string> fields;
};

/// Throws ValidationError on an unterminated quoted field.
std::vector<Row> parse(std::string_view text);

std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

}  // namespace dimfuse::csv
