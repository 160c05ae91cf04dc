#include "dimfuse/score_matrix.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace dimfuse {

std::string_view to_string(SchemaMode mode) {
  return mode == SchemaMode::softmax ? "softmax" : "raw";
}

SchemaMode parse_schema_mode(std::string_view text) {
  if (text == "softmax") return SchemaMode::softmax;
  if (text == "raw") return SchemaMode::raw;
  throw std::invalid_argument(fmt::format("unknown schema mode '{}'", text));
}

ScoreMatrix::ScoreMatrix(std::string site_id, std::size_t classes)
    : site_id_(std::move(site_id)), classes_(classes) {}

void ScoreMatrix::append_row(int ordinal, std::span<const double> scores) {
  if (scores.size() != classes_) {
    throw std::invalid_argument(fmt::format("row for ordinal {} has {} scores, expected {}",
                                            ordinal, scores.size(), classes_));
  }
  ordinals_.push_back(ordinal);
  values_.insert(values_.end(), scores.begin(), scores.end());
}

std::string ValidationVerdict::summary() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v;
  }
  return out;
}

ValidationVerdict validate_matrix(const ScoreMatrix& matrix, const LabelSet& labels,
                                  SchemaMode mode) {
  ValidationVerdict verdict;
  auto& out = verdict.violations;

  if (matrix.rows() < 1) out.push_back("row count 0 < 1");
  if (matrix.rows() > static_cast<std::size_t>(kMaxImages)) {
    out.push_back(fmt::format("row count {} > {}", matrix.rows(), kMaxImages));
  }
  if (matrix.classes() != labels.size()) {
    out.push_back(fmt::format("column count {} != label count {}", matrix.classes(),
                              labels.size()));
  }

  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const int ordinal = matrix.ordinal(r);
    if (ordinal < 1 || ordinal > kMaxImages) {
      out.push_back(fmt::format("ordinal {} outside 1..{}", ordinal, kMaxImages));
    }
    if (r > 0 && ordinal <= matrix.ordinal(r - 1)) {
      out.push_back(fmt::format("ordinal {} does not increase after {}", ordinal,
                                matrix.ordinal(r - 1)));
    }
    double sum = 0.0;
    bool finite = true;
    for (std::size_t c = 0; c < matrix.classes(); ++c) {
      const double v = matrix.at(r, c);
      if (!std::isfinite(v)) {
        finite = false;
        out.push_back(fmt::format("ordinal {} column {} is not finite", ordinal, c + 1));
        continue;
      }
      if (v < 0.0 || v > 1.0) {
        out.push_back(fmt::format("ordinal {} column {} score {} outside [0,1]", ordinal,
                                  c + 1, v));
      }
      sum += v;
    }
    if (mode == SchemaMode::softmax && finite &&
        std::abs(sum - 1.0) > kSoftmaxTolerance) {
      out.push_back(fmt::format("ordinal {} row sum {:.6g} outside 1±1e-4", ordinal, sum));
    }
  }
  return verdict;
}

}  // namespace dimfuse
