#pragma once

#include <cstdint>
#include <filesystem>

#include "dimfuse/dataset.hpp"

namespace dimfuse {

/// Planted synthetic dataset: balanced labels, stub-scored images whose
/// per-image correct rate is `correct_rate`.
struct SynthParams {
  std::size_t sites = 500;
  std::size_t classes = 4;
  int images = 20;
  double correct_rate = 0.6;
  double concentration = 0.5;
  std::uint64_t seed = 7;
  Split split = Split::test;
  bool write_images = false;  // placeholder NN.jpg files under images/
};

/// Writes <out>/manifest.csv, <out>/scores/<site_id>.json and, when asked,
/// <out>/images/<site_id>/NN.jpg. Output depends only on the parameters.
DatasetManifest synthesize(const SynthParams& params, const std::filesystem::path& out);

}  // namespace dimfuse
