#pragma once

#include <array>
#include <compare>
#include <string>
#include <string_view>

namespace dimfuse {

enum class MetricFamily { S, H, A, PerImage };

/// One of the 13 evaluation metrics: {S,H,A} x {5,10,15,20} plus PerImage.
class MetricId {
 public:
  /// Throws std::invalid_argument for an unsupported family/k pair.
  MetricId(MetricFamily family, int k);
  static MetricId per_image() { return MetricId(MetricFamily::PerImage, 0); }

  MetricFamily family() const { return family_; }
  /// Truncation level; 0 for PerImage.
  int k() const { return k_; }
  bool is_fusion() const { return family_ != MetricFamily::PerImage; }

  /// Position in the fixed enumeration order (S, H, A by ascending k, PerImage last).
  int ordinal() const;
  std::string name() const;

  friend bool operator==(const MetricId&, const MetricId&) = default;
  friend std::strong_ordering operator<=>(const MetricId& a, const MetricId& b) {
    return a.ordinal() <=> b.ordinal();
  }

 private:
  MetricFamily family_;
  int k_;
};

inline constexpr std::array<int, 4> kTruncationLevels = {5, 10, 15, 20};
inline constexpr std::size_t kMetricCount = 13;

/// All 13 metrics in enumeration order.
const std::array<MetricId, kMetricCount>& all_metrics();
/// The 12 per-site fusion metrics (all_metrics() without PerImage).
std::array<MetricId, 12> fusion_metrics();

/// Accepts "S05", "s5", "A15", "PerImage"; throws std::invalid_argument otherwise.
MetricId parse_metric(std::string_view text);

}  // namespace dimfuse
