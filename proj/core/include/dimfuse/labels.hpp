#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dimfuse {

struct ClassLabel {
  std::size_t index = 0;
  std::string name;

  /// 1-based position, the numbering used in every rendered output.
  std::size_t display_index() const { return index + 1; }

  friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
};

/// Ordered class set; its order is the column order of every score matrix.
class LabelSet {
 public:
  LabelSet() = default;

  /// Throws ValidationError unless there are >= 2 unique non-empty names.
  explicit LabelSet(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  ClassLabel at(std::size_t index) const;
  std::optional<ClassLabel> find(std::string_view name) const;
  /// Like find() but throws ValidationError for an unknown name.
  ClassLabel require(std::string_view name) const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<std::string> names_;
};

/// The four classes of the reference dataset, in canonical column order.
LabelSet reference_labels();

/// reference_labels() when count == 4, otherwise class_1 .. class_<count>.
LabelSet synthetic_labels(std::size_t count);

}  // namespace dimfuse
