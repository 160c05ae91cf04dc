#include "dimfuse/image_stats.hpp"

#include <algorithm>
#include <array>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <thread>

#include <fmt/format.h>
#include <jpeglib.h>
#include <nlohmann/json.hpp>

#include "dimfuse/error.hpp"
#include "dimfuse/fsutil.hpp"
#include "csv.hpp"

namespace dimfuse {

namespace fs = std::filesystem;

namespace {

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr info) {
  auto* err = reinterpret_cast<JpegErrorManager*>(info->err);
  (*info->err->format_message)(info, err->message);
  std::longjmp(err->jump, 1);
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

ImageSize read_jpeg_size(const fs::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw DomainError("cannot open file");

  jpeg_decompress_struct info{};
  JpegErrorManager err{};
  info.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.output_message = [](j_common_ptr) {};
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&info);
    throw DomainError(fmt::format("bad JPEG header: {}", err.message));
  }
  jpeg_create_decompress(&info);
  jpeg_stdio_src(&info, file.get());
  jpeg_read_header(&info, TRUE);
  ImageSize size{static_cast<int>(info.image_width), static_cast<int>(info.image_height)};
  jpeg_destroy_decompress(&info);
  return size;
}

std::uint32_t big_endian32(const unsigned char* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

}  // namespace

ImageSize read_image_size(const fs::path& path) {
  std::array<unsigned char, 24> head{};
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open file");
    in.read(reinterpret_cast<char*>(head.data()), head.size());
    if (in.gcount() < 3) throw DomainError("file too short");
    if (in.gcount() < static_cast<std::streamsize>(head.size())) head.fill(0);
  }
  static constexpr unsigned char kPng[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (std::equal(std::begin(kPng), std::end(kPng), head.begin())) {
    if (!std::equal(head.begin() + 12, head.begin() + 16, "IHDR")) {
      throw DomainError("PNG without IHDR chunk");
    }
    return {static_cast<int>(big_endian32(&head[16])), static_cast<int>(big_endian32(&head[20]))};
  }
  if (head[0] == 0xFF && head[1] == 0xD8 && head[2] == 0xFF) return read_jpeg_size(path);
  throw DomainError("unsupported image format");
}

std::string encode_placeholder_jpeg(int width, int height, std::uint8_t shade) {
  jpeg_compress_struct info{};
  jpeg_error_mgr err{};
  info.err = jpeg_std_error(&err);
  jpeg_create_compress(&info);

  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  jpeg_mem_dest(&info, &buffer, &size);
  info.image_width = static_cast<JDIMENSION>(width);
  info.image_height = static_cast<JDIMENSION>(height);
  info.input_components = 1;
  info.in_color_space = JCS_GRAYSCALE;
  jpeg_set_defaults(&info);
  jpeg_set_quality(&info, 75, TRUE);
  jpeg_start_compress(&info, TRUE);
  std::vector<JSAMPLE> row(static_cast<std::size_t>(width), shade);
  while (info.next_scanline < info.image_height) {
    JSAMPROW rows[1] = {row.data()};
    jpeg_write_scanlines(&info, rows, 1);
  }
  jpeg_finish_compress(&info);
  std::string out(reinterpret_cast<const char*>(buffer), size);
  jpeg_destroy_compress(&info);
  std::free(buffer);
  return out;
}

int ratio_bin_base(ImageSize size, int max_ratio_percent) {
  if (size.height <= 0) return max_ratio_percent;
  // integer form of floor(100 * w / h / 10) avoids rounding at bin edges
  const long long bin = 10LL * size.width / size.height;
  return static_cast<int>(std::min<long long>(bin * 10, max_ratio_percent));
}

ImageSetStats scan_image_sets(const fs::path& root, const DatasetManifest& manifest,
                              const ScanOptions& options) {
  if (options.max_ratio_percent <= 0 || options.max_ratio_percent % 10 != 0) {
    throw std::invalid_argument("max ratio must be a positive multiple of 10");
  }
  struct SiteScan {
    std::vector<ImageSize> sizes;
    std::vector<std::pair<std::string, std::string>> corrupt;
  };
  std::vector<SiteScan> scans(manifest.records.size());
  auto scan_site = [&](std::size_t i) {
    const auto& site = manifest.records[i].site_id;
    for (int ordinal : list_image_ordinals(root / site)) {
      const std::string name = image_name_for_ordinal(ordinal);
      try {
        scans[i].sizes.push_back(read_image_size(root / site / name));
      } catch (const DomainError& e) {
        scans[i].corrupt.emplace_back(site + "/" + name, e.what());
      }
    }
  };

  const unsigned workers = std::max(1u, options.jobs);
  if (workers == 1) {
    for (std::size_t i = 0; i < scans.size(); ++i) scan_site(i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < scans.size(); i += workers) scan_site(i);
      });
    }
  }

  ImageSetStats stats;
  stats.max_ratio_percent = options.max_ratio_percent;
  for (int base = 0; base <= options.max_ratio_percent; base += 10) {
    stats.wh_ratio_histogram.push_back(RatioBin{base, 0});
  }
  for (std::size_t i = 0; i < scans.size(); ++i) {
    const auto& site = manifest.records[i].site_id;
    stats.per_site_image_counts[site] = scans[i].sizes.size();
    for (const auto& size : scans[i].sizes) {
      ++stats.total_images;
      stats.wh_ratio_histogram[static_cast<std::size_t>(
                                   ratio_bin_base(size, options.max_ratio_percent) / 10)]
          .count++;
      if (size.width > options.large_edge_px && size.height > options.large_edge_px) {
        ++stats.min_dim_gt_224_count;
      }
    }
    stats.corrupt.insert(stats.corrupt.end(), scans[i].corrupt.begin(), scans[i].corrupt.end());
  }
  return stats;
}

std::vector<std::pair<std::string, std::uint64_t>> language_table(const DatasetManifest& manifest) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& r : manifest.records) ++counts[r.language.value_or("unknown")];
  std::vector<std::pair<std::string, std::uint64_t>> rows(counts.begin(), counts.end());
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return rows;
}

std::string histogram_csv(const ImageSetStats& stats) {
  std::string out = "bin_base_percent,count\n";
  for (const auto& bin : stats.wh_ratio_histogram) {
    out += fmt::format("{},{}\n", bin.base_percent, bin.count);
  }
  return out;
}

std::string stats_json(const DatasetManifest& manifest, const std::optional<ImageSetStats>& images) {
  using nlohmann::json;
  json splits = json::object();
  for (const auto& [split, count] : manifest.split_counts()) splits[std::string(to_string(split))] = count;
  json languages = json::array();
  for (const auto& [language, count] : language_table(manifest)) {
    languages.push_back({{"language", language}, {"count", count}});
  }
  json doc = {{"records", manifest.records.size()},
              {"split_counts", std::move(splits)},
              {"languages", std::move(languages)}};
  if (images) {
    json hist = json::array();
    for (const auto& bin : images->wh_ratio_histogram) {
      hist.push_back({{"bin_base_percent", bin.base_percent}, {"count", bin.count}});
    }
    json corrupt = json::array();
    for (const auto& [file, error] : images->corrupt) {
      corrupt.push_back({{"file", file}, {"error", error}});
    }
    doc["images"] = {{"total_images", images->total_images},
                     {"max_ratio", images->max_ratio_percent},
                     {"min_dim_gt_224_count", images->min_dim_gt_224_count},
                     {"histogram", std::move(hist)},
                     {"per_site_image_counts", images->per_site_image_counts},
                     {"corrupt", std::move(corrupt)}};
  }
  return doc.dump(1) + "\n";
}

std::string stats_csv(const DatasetManifest& manifest, const std::optional<ImageSetStats>& images) {
  std::string out = "split,count\n";
  for (const auto& [split, count] : manifest.split_counts()) {
    out += fmt::format("{},{}\n", to_string(split), count);
  }
  out += "\nlanguage,count\n";
  for (const auto& [language, count] : language_table(manifest)) {
    out += fmt::format("{},{}\n", csv::escape(language), count);
  }
  if (images) {
    out += "\n" + histogram_csv(*images);
    out += fmt::format("\ntotal_images,{}\nmin_dim_gt_224_count,{}\ncorrupt_images,{}\n",
                       images->total_images, images->min_dim_gt_224_count,
                       images->corrupt.size());
  }
  return out;
}

}  // namespace dimfuse
