#include "dimfuse/fsutil.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <unistd.h>

#include "dimfuse/error.hpp"
#include "dimfuse/score_matrix.hpp"

namespace dimfuse {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + fmt::format(".tmp.{}.{}", ::getpid(), counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError(fmt::format("cannot write '{}'", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.flush()) throw DomainError(fmt::format("short write to '{}'", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw DomainError(fmt::format("cannot rename onto '{}': {}", path.string(), ec.message()));
  }
}

std::optional<int> image_ordinal_from_name(std::string_view filename) {
  if (filename.size() != 6 || !filename.ends_with(".jpg")) return std::nullopt;
  const char a = filename[0];
  const char b = filename[1];
  if (a < '0' || a > '9' || b < '0' || b > '9') return std::nullopt;
  const int ordinal = (a - '0') * 10 + (b - '0');
  if (ordinal < 1 || ordinal > kMaxImages) return std::nullopt;
  return ordinal;
}

std::string image_name_for_ordinal(int ordinal) { return fmt::format("{:02d}.jpg", ordinal); }

std::vector<int> list_image_ordinals(const fs::path& site_dir) {
  std::vector<int> ordinals;
  std::error_code ec;
  if (!fs::is_directory(site_dir, ec)) return ordinals;
  for (const auto& entry : fs::directory_iterator(site_dir)) {
    if (!entry.is_regular_file()) continue;
    if (auto ordinal = image_ordinal_from_name(entry.path().filename().string())) {
      ordinals.push_back(*ordinal);
    }
  }
  std::sort(ordinals.begin(), ordinals.end());
  return ordinals;
}

}  // namespace dimfuse
