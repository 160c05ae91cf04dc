#include "dimfuse/aggregate.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "dimfuse/error.hpp"

namespace dimfuse {

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

OneHotMatrix one_hot(const ScoreMatrix& matrix) {
  OneHotMatrix out{ScoreMatrix(matrix.site_id(), matrix.classes())};
  std::vector<double> row(matrix.classes(), 0.0);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    std::fill(row.begin(), row.end(), 0.0);
    row[argmax(matrix.row(r))] = 1.0;
    out.matrix.append_row(matrix.ordinal(r), row);
  }
  return out;
}

ReorderedMatrix average_reorder(const ScoreMatrix& matrix) {
  const std::size_t n = matrix.rows();
  ReorderedMatrix out{ScoreMatrix(matrix.site_id(), matrix.classes()), 0};
  if (n == 0) return out;

  std::vector<double> means(matrix.classes(), 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < matrix.classes(); ++c) means[c] += matrix.at(r, c);
  }
  for (auto& m : means) m /= static_cast<double>(n);
  const std::size_t dominant = argmax(means);
  out.dominant_column = dominant;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double va = matrix.at(a, dominant);
    const double vb = matrix.at(b, dominant);
    if (va != vb) return va > vb;
    return matrix.ordinal(a) < matrix.ordinal(b);
  });
  for (std::size_t r : order) out.matrix.append_row(matrix.ordinal(r), matrix.row(r));
  return out;
}

std::vector<double> truncated_column_sums(const ScoreMatrix& matrix, int k) {
  std::vector<double> sums(matrix.classes(), 0.0);
  const std::size_t used = std::min<std::size_t>(static_cast<std::size_t>(k), matrix.rows());
  for (std::size_t r = 0; r < used; ++r) {
    for (std::size_t c = 0; c < matrix.classes(); ++c) sums[c] += matrix.at(r, c);
  }
  return sums;
}

FusedScores fuse(const ScoreMatrix& matrix, MetricId metric, const LabelSet& labels) {
  if (!metric.is_fusion()) throw std::invalid_argument("not a fusion metric");
  if (matrix.empty()) throw NoEvidenceError(matrix.site_id());

  std::vector<double> sums;
  switch (metric.family()) {
    case MetricFamily::S: sums = truncated_column_sums(matrix, metric.k()); break;
    case MetricFamily::H: sums = truncated_column_sums(one_hot(matrix).matrix, metric.k()); break;
    case MetricFamily::A:
      sums = truncated_column_sums(average_reorder(matrix).matrix, metric.k());
      break;
    case MetricFamily::PerImage: break;
  }
  const std::size_t decided = argmax(sums);
  const std::size_t used =
      std::min<std::size_t>(static_cast<std::size_t>(metric.k()), matrix.rows());
  return FusedScores{metric, std::move(sums), labels.at(decided), used};
}

ClassLabel classify_site(const ScoreMatrix& matrix, MetricId metric, const LabelSet& labels) {
  return fuse(matrix, metric, labels).decided;
}

std::array<std::size_t, 12> decide_all(const ScoreMatrix& matrix) {
  if (matrix.empty()) throw NoEvidenceError(matrix.site_id());
  std::array<std::size_t, 12> decided{};
  const ScoreMatrix hot = one_hot(matrix).matrix;
  const ScoreMatrix reordered = average_reorder(matrix).matrix;
  const ScoreMatrix* sources[3] = {&matrix, &hot, &reordered};
  for (const MetricId& metric : fusion_metrics()) {
    const auto* source = sources[static_cast<int>(metric.family())];
    decided[static_cast<std::size_t>(metric.ordinal())] =
        argmax(truncated_column_sums(*source, metric.k()));
  }
  return decided;
}

}  // namespace dimfuse
