#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace dimfuse::testing {

namespace fs = std::filesystem;

#ifndef DIMFUSE_FIXTURE_DIR
#error "DIMFUSE_FIXTURE_DIR must point at tests/fixtures"
#endif

fs::path fixture_dir() { return DIMFUSE_FIXTURE_DIR; }

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("dimfuse-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
  std::map<std::string, std::string> tree;
  if (!fs::exists(root)) return tree;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream bytes;
    bytes << in.rdbuf();
    tree[fs::relative(entry.path(), root).generic_string()] = bytes.str();
  }
  return tree;
}

namespace {

std::vector<int> random_ordinals(std::mt19937_64& rng, int max_rows) {
  std::uniform_int_distribution<int> count_dist(1, max_rows);
  const int n = count_dist(rng);
  std::vector<int> all(20);
  for (int i = 0; i < 20; ++i) all[static_cast<std::size_t>(i)] = i + 1;
  std::shuffle(all.begin(), all.end(), rng);
  std::vector<int> chosen(all.begin(), all.begin() + n);
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace

ScoreMatrix random_matrix(std::mt19937_64& rng, std::size_t classes, int max_rows) {
  std::exponential_distribution<double> exp(1.0);
  ScoreMatrix m("random", classes);
  for (int ordinal : random_ordinals(rng, max_rows)) {
    std::vector<double> row(classes);
    double sum = 0.0;
    for (auto& v : row) sum += (v = exp(rng));
    for (auto& v : row) v /= sum;
    m.append_row(ordinal, row);
  }
  return m;
}

ScoreMatrix random_tied_matrix(std::mt19937_64& rng, std::size_t classes, int max_rows) {
  std::uniform_int_distribution<int> step(0, 4);
  ScoreMatrix m("tied", classes);
  for (int ordinal : random_ordinals(rng, max_rows)) {
    std::vector<double> row(classes);
    for (auto& v : row) v = 0.25 * step(rng);
    m.append_row(ordinal, row);
  }
  return m;
}

namespace naive {

Rows rows_of(const ScoreMatrix& m) {
  Rows rows;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::vector<double> row;
    for (std::size_t c = 0; c < m.classes(); ++c) row.push_back(m.at(r, c));
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> summation(const Rows& rows, int k) {
  std::vector<double> out(rows.empty() ? 0 : rows[0].size(), 0.0);
  for (int i = 0; i < k && i < static_cast<int>(rows.size()); ++i) {
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = out[c] + rows[static_cast<std::size_t>(i)][c];
  }
  return out;
}

std::vector<double> one_hot_sum(const Rows& rows, int k) {
  Rows hot;
  for (const auto& row : rows) {
    std::size_t best = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c] > row[best]) best = c;
    }
    std::vector<double> h(row.size(), 0.0);
    h[best] = 1.0;
    hot.push_back(h);
  }
  return summation(hot, k);
}

std::vector<double> average_reordered_sum(const Rows& rows, int k) {
  if (rows.empty()) return {};
  const std::size_t classes = rows[0].size();
  std::size_t dominant = 0;
  double best_mean = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    double total = 0.0;
    for (const auto& row : rows) total = total + row[c];
    const double mean = total / static_cast<double>(rows.size());
    if (c == 0 || mean > best_mean) {
      best_mean = mean;
      dominant = c;
    }
  }
  // selection sort: repeatedly take the largest remaining value, earliest row first
  std::vector<bool> used(rows.size(), false);
  Rows sorted;
  for (std::size_t step = 0; step < rows.size(); ++step) {
    std::size_t pick = rows.size();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (used[r]) continue;
      if (pick == rows.size() || rows[r][dominant] > rows[pick][dominant]) pick = r;
    }
    used[pick] = true;
    sorted.push_back(rows[pick]);
  }
  return summation(sorted, k);
}

std::size_t decide(const std::vector<double>& fused) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < fused.size(); ++c) {
    if (fused[c] > fused[best]) best = c;
  }
  return best;
}

}  // namespace naive

DatasetManifest fetch_manifest() {
  DatasetManifest manifest{"fetch-fixture", reference_labels(), {}};
  for (int i = 1; i <= 12; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "fetch_%02d", i);
    manifest.records.push_back(WebSiteRecord{id, std::string("https://") + id + ".example.net/",
                                             manifest.labels.at(static_cast<std::size_t>(i - 1) % 4),
                                             Split::test, "en", std::nullopt, std::nullopt});
  }
  return manifest;
}

void install_fetch_scenarios(MockProvider& provider) {
  using Entry = MockProvider::Entry;
  using F = MockProvider::Failure;
  auto photo = [](int rank, F failure = F::none) {
    return Entry{SearchResult{rank, "", 160 + 7 * rank, 120 + 3 * rank, "image/jpeg"}, failure};
  };
  auto svg = [](int rank) { return Entry{SearchResult{rank, "", 48, 48, "image/svg+xml"}, F::none}; };
  auto icon = [](int rank) { return Entry{SearchResult{rank, "", 64, 64, "image/png"}, F::none}; };

  std::vector<Entry> many;
  for (int rank = 1; rank <= 25; ++rank) {
    many.push_back(rank == 3 || rank == 11 || rank == 19 ? svg(rank) : photo(rank));
  }
  provider.set_scenario("https://fetch_01.example.net/", many);

  std::vector<Entry> few;
  for (int rank = 1; rank <= 7; ++rank) few.push_back(photo(rank));
  provider.set_scenario("https://fetch_02.example.net/", few);

  std::vector<Entry> timeout;
  for (int rank = 1; rank <= 12; ++rank) timeout.push_back(photo(rank, rank == 5 ? F::timeout : F::none));
  provider.set_scenario("https://fetch_03.example.net/", timeout);

  std::vector<Entry> mixed;
  for (int rank = 1; rank <= 14; ++rank) {
    if (rank % 4 == 2) {
      mixed.push_back(icon(rank));
    } else {
      mixed.push_back(photo(rank, rank == 9 ? F::http_error : F::none));
    }
  }
  provider.set_scenario("https://fetch_04.example.net/", mixed);

  provider.set_search_failure("https://fetch_05.example.net/", true);
}

}  // namespace dimfuse::testing
