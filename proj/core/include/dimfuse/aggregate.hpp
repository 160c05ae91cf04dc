#pragma once

// Late fusion of per-image class scores into one decision per site.
//
// Three families fuse the leading k rows of a site's score matrix:
//   S  sums the raw scores,
//   H  sums one-hot rows (1 at each row's argmax),
//   A  sums rows after sorting them by the column with the largest mean.
// The decided class is the argmax of the fused vector. Ties always go to
// the lowest class index; reorder ties go to the lower original ordinal.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "dimfuse/labels.hpp"
#include "dimfuse/metric.hpp"
#include "dimfuse/score_matrix.hpp"

namespace dimfuse {

/// Index of the largest value; the lowest index wins ties. Empty input -> 0.
std::size_t argmax(std::span<const double> values);

/// Same shape as the source matrix with exactly one 1 per row.
struct OneHotMatrix {
  ScoreMatrix matrix;
};

/// Source rows permuted so the dominant column is non-increasing.
/// `matrix.ordinal(r)` is the original ordinal of row r, so ordinals are
/// not increasing here.
struct ReorderedMatrix {
  ScoreMatrix matrix;
  std::size_t dominant_column = 0;
};

struct FusedScores {
  MetricId metric;
  std::vector<double> per_class;
  ClassLabel decided;
  std::size_t images_used = 0;
};

OneHotMatrix one_hot(const ScoreMatrix& matrix);
ReorderedMatrix average_reorder(const ScoreMatrix& matrix);

/// Column sums over the first min(k, rows) rows, in row order.
std::vector<double> truncated_column_sums(const ScoreMatrix& matrix, int k);

/// Throws std::invalid_argument for PerImage and NoEvidenceError for an
/// empty matrix.
FusedScores fuse(const ScoreMatrix& matrix, MetricId metric, const LabelSet& labels);

/// fuse(...).decided
ClassLabel classify_site(const ScoreMatrix& matrix, MetricId metric, const LabelSet& labels);

/// Decided class index for every fusion metric, computing each transform once.
/// Result is indexed by MetricId::ordinal() (0..11).
std::array<std::size_t, 12> decide_all(const ScoreMatrix& matrix);

}  // namespace dimfuse
