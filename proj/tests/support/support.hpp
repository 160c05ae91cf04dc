#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dimfuse/dataset.hpp"
#include "dimfuse/fetch.hpp"
#include "dimfuse/score_matrix.hpp"

namespace dimfuse::testing {

std::filesystem::path fixture_dir();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

 private:
  std::filesystem::path path_;
};

/// Relative path -> file bytes for every regular file below `root`.
std::map<std::string, std::string> snapshot_tree(const std::filesystem::path& root);

/// Random softmax-like matrix: 1..max_rows rows, ordinals a random
/// increasing subset of 1..20, rows normalised to sum to 1.
ScoreMatrix random_matrix(std::mt19937_64& rng, std::size_t classes, int max_rows = 20);

/// Same as random_matrix but values drawn from a coarse grid so that
/// argmax and reorder ties are frequent.
ScoreMatrix random_tied_matrix(std::mt19937_64& rng, std::size_t classes, int max_rows = 20);

// Brute-force fusion written directly from the metric definitions. It
// shares nothing with the engine beyond the plain-vector data.
namespace naive {

using Rows = std::vector<std::vector<double>>;

Rows rows_of(const ScoreMatrix& m);
std::vector<double> summation(const Rows& rows, int k);
std::vector<double> one_hot_sum(const Rows& rows, int k);
std::vector<double> average_reordered_sum(const Rows& rows, int k);
std::size_t decide(const std::vector<double>& fused);

}  // namespace naive

// Fetch fixture shared by the unit and acceptance suites.

/// Twelve sites. fetch_01: 25 results of which 3 are SVG icons;
/// fetch_02: only 7 results; fetch_03: rank 5 times out; fetch_04: small
/// icons interleaved and rank 9 answers 404; fetch_05: search fails with a
/// server error; the rest use generated scenarios.
DatasetManifest fetch_manifest();
void install_fetch_scenarios(MockProvider& provider);

/// Local HTTP image-search service backed by a MockProvider. Searches are
/// answered as {"data": {"items": [{"position", "thumb": {"link"}, "w",
/// "h", "type"}]}}; thumbnails that should time out stall for `stall`.
class MockSearchServer {
 public:
  explicit MockSearchServer(MockProvider& backing,
                            std::chrono::milliseconds stall = std::chrono::milliseconds(800));
  ~MockSearchServer();
  MockSearchServer(const MockSearchServer&) = delete;
  MockSearchServer& operator=(const MockSearchServer&) = delete;

  int port() const;
  /// Provider config pointing at this server; requires `api_key` in the
  /// header named by auth_header (taken from env var auth_env).
  HttpProviderConfig provider_config() const;
  static constexpr const char* kAuthEnv = "DIMFUSE_TEST_SEARCH_KEY";
  static constexpr const char* kApiKey = "test-key-123";

  std::size_t search_requests() const;
  std::size_t thumbnail_requests() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dimfuse::testing
