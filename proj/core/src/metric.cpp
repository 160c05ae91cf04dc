#include "dimfuse/metric.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>

#include <fmt/format.h>

namespace dimfuse {

namespace {

int level_index(int k) {
  auto it = std::find(kTruncationLevels.begin(), kTruncationLevels.end(), k);
  return it == kTruncationLevels.end() ? -1 : static_cast<int>(it - kTruncationLevels.begin());
}

char family_letter(MetricFamily family) {
  switch (family) {
    case MetricFamily::S: return 'S';
    case MetricFamily::H: return 'H';
    case MetricFamily::A: return 'A';
    case MetricFamily::PerImage: break;
  }
  return '?';
}

}  // namespace

MetricId::MetricId(MetricFamily family, int k) : family_(family), k_(k) {
  if (family == MetricFamily::PerImage) {
    if (k != 0) throw std::invalid_argument("PerImage takes no truncation level");
  } else if (level_index(k) < 0) {
    throw std::invalid_argument(fmt::format("truncation level {} not in {{5,10,15,20}}", k));
  }
}

int MetricId::ordinal() const {
  if (family_ == MetricFamily::PerImage) return 12;
  return static_cast<int>(family_) * 4 + level_index(k_);
}

std::string MetricId::name() const {
  if (family_ == MetricFamily::PerImage) return "PerImage";
  return fmt::format("{}{:02d}", family_letter(family_), k_);
}

const std::array<MetricId, kMetricCount>& all_metrics() {
  static const std::array<MetricId, kMetricCount> metrics = [] {
    std::array<MetricId, kMetricCount> out{
        MetricId(MetricFamily::S, 5),  MetricId(MetricFamily::S, 10),
        MetricId(MetricFamily::S, 15), MetricId(MetricFamily::S, 20),
        MetricId(MetricFamily::H, 5),  MetricId(MetricFamily::H, 10),
        MetricId(MetricFamily::H, 15), MetricId(MetricFamily::H, 20),
        MetricId(MetricFamily::A, 5),  MetricId(MetricFamily::A, 10),
        MetricId(MetricFamily::A, 15), MetricId(MetricFamily::A, 20),
        MetricId::per_image()};
    return out;
  }();
  return metrics;
}

std::array<MetricId, 12> fusion_metrics() {
  const auto& all = all_metrics();
  return {all[0], all[1], all[2], all[3], all[4], all[5],
          all[6], all[7], all[8], all[9], all[10], all[11]};
}

MetricId parse_metric(std::string_view text) {
  std::string lower;
  for (char ch : text) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (lower == "perimage" || lower == "per_image" || lower == "per-image") {
    return MetricId::per_image();
  }
  if (lower.size() < 2) throw std::invalid_argument(fmt::format("unknown metric '{}'", text));

  MetricFamily family;
  switch (lower[0]) {
    case 's': family = MetricFamily::S; break;
    case 'h': family = MetricFamily::H; break;
    case 'a': family = MetricFamily::A; break;
    default: throw std::invalid_argument(fmt::format("unknown metric '{}'", text));
  }
  int k = 0;
  const char* begin = lower.data() + 1;
  const char* end = lower.data() + lower.size();
  auto [ptr, ec] = std::from_chars(begin, end, k);
  if (ec != std::errc() || ptr != end || level_index(k) < 0) {
    throw std::invalid_argument(fmt::format("unknown metric '{}'", text));
  }
  return MetricId(family, k);
}

}  // namespace dimfuse
