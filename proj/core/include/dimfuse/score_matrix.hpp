#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dimfuse/labels.hpp"

namespace dimfuse {

inline constexpr int kMaxImages = 20;
inline constexpr double kSoftmaxTolerance = 1e-4;

enum class SchemaMode { softmax, raw };

std::string_view to_string(SchemaMode mode);
SchemaMode parse_schema_mode(std::string_view text);

/// Row-major table of per-image class scores, one row per image ordinal.
///
/// The table is always rectangular; everything else (ordinal range and
/// order, score range, row sums) is checked by validate_matrix() so that
/// invalid input can be reported instead of rejected at construction.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::string site_id, std::size_t classes);

  /// Throws std::invalid_argument if scores.size() != classes().
  void append_row(int ordinal, std::span<const double> scores);

  const std::string& site_id() const { return site_id_; }
  std::size_t classes() const { return classes_; }
  std::size_t rows() const { return ordinals_.size(); }
  bool empty() const { return ordinals_.empty(); }

  int ordinal(std::size_t row) const { return ordinals_[row]; }
  const std::vector<int>& ordinals() const { return ordinals_; }
  std::span<const double> row(std::size_t row) const {
    return {values_.data() + row * classes_, classes_};
  }
  double at(std::size_t row, std::size_t column) const {
    return values_[row * classes_ + column];
  }
  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

 private:
  std::string site_id_;
  std::size_t classes_ = 0;
  std::vector<int> ordinals_;
  std::vector<double> values_;
};

struct ValidationVerdict {
  std::vector<std::string> violations;

  bool valid() const { return violations.empty(); }
  std::string summary() const;
};

/// Lists every violated matrix invariant; never throws.
ValidationVerdict validate_matrix(const ScoreMatrix& matrix, const LabelSet& labels,
                                  SchemaMode mode);

}  // namespace dimfuse
