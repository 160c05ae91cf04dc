#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "dimfuse/dataset.hpp"
#include "dimfuse/error.hpp"

namespace dimfuse {

struct SearchResult {
  int rank = 0;  // 1-based, strictly increasing within a response
  std::string thumbnail_url;
  int width = 0;   // 0 = unknown
  int height = 0;  // 0 = unknown
  std::string mime;

  friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

enum class QueryMode { url, domain };

std::string_view to_string(QueryMode mode);
QueryMode parse_query_mode(std::string_view text);

struct FetchPolicy {
  int max_images = 20;
  int min_edge_px = 64;
  std::set<std::string> allowed_mimes = {"image/jpeg", "image/png", "image/webp"};
  /// Square results with an edge at or below this are treated as icons.
  int icon_square_max = 128;
  std::chrono::milliseconds request_timeout{10000};
  unsigned max_concurrent = 4;
  std::chrono::milliseconds per_host_delay{0};
  QueryMode query_mode = QueryMode::url;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// Photo-like: allowed raster MIME, both edges >= min_edge_px and not a
/// small square icon. Unknown (0) dimensions pass the size checks.
bool is_photo_like(const SearchResult& result, const FetchPolicy& policy);

/// Search or download failure. `retryable` marks transient causes
/// (timeouts, connection errors, 5xx).
class ProviderError : public DomainError {
 public:
  ProviderError(const std::string& message, bool retryable)
      : DomainError(message), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

/// Image-search backend. Implementations must be safe to call concurrently.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::vector<SearchResult> search(std::string_view query) = 0;
  virtual std::string download(const SearchResult& result, std::chrono::milliseconds timeout) = 0;
};

/// Field mapping for a JSON search API. Paths are dot-separated keys.
struct HttpProviderConfig {
  std::string endpoint;  // must contain {query}; the query is URL-encoded
  std::string auth_header;
  std::string auth_env;  // environment variable holding the credential
  std::string results_path;
  std::string rank_field = "rank";
  std::string url_field = "url";
  std::string width_field = "width";
  std::string height_field = "height";
  std::string mime_field = "mime";
};

/// Throws ValidationError on a malformed config.
HttpProviderConfig parse_http_provider_config(std::string_view json_text);

class HttpJsonProvider : public Provider {
 public:
  explicit HttpJsonProvider(HttpProviderConfig config,
                            std::chrono::milliseconds search_timeout = std::chrono::seconds(30));
  std::vector<SearchResult> search(std::string_view query) override;
  std::string download(const SearchResult& result, std::chrono::milliseconds timeout) override;

 private:
  HttpProviderConfig config_;
  std::chrono::milliseconds search_timeout_;
  std::string auth_value_;
};

/// Deterministic in-process provider.
class MockProvider : public Provider {
 public:
  enum class Failure { none, timeout, http_error };
  struct Entry {
    SearchResult result;
    Failure failure = Failure::none;
  };

  /// Queries without a scenario get a generated one keyed by (seed, query).
  explicit MockProvider(std::uint64_t seed = 42);

  void set_scenario(const std::string& query, std::vector<Entry> entries);
  void set_search_failure(const std::string& query, bool retryable);

  /// The entries a search for `query` returns.
  std::vector<Entry> scenario(std::string_view query) const;

  std::vector<SearchResult> search(std::string_view query) override;
  std::string download(const SearchResult& result, std::chrono::milliseconds timeout) override;

  /// Thumbnail bytes for a result (a flat JPEG of the advertised size).
  static std::string thumbnail_bytes(const SearchResult& result);

 private:
  std::uint64_t seed_;
  mutable std::mutex mu_;
  std::map<std::string, std::vector<Entry>, std::less<>> scenarios_;
  std::map<std::string, bool, std::less<>> search_failures_;
  std::map<std::string, Failure, std::less<>> url_failures_;
};

/// Host part of an http(s) URL ("" when absent).
std::string url_host(std::string_view url);

/// Enforces a minimum gap between requests to the same host.
class HostThrottle {
 public:
  explicit HostThrottle(std::chrono::milliseconds delay) : delay_(delay) {}
  void acquire(const std::string& host);

 private:
  std::chrono::milliseconds delay_;
  std::mutex mu_;
  std::map<std::string, std::chrono::steady_clock::time_point> next_slot_;
};

struct RankFailure {
  int ordinal = 0;
  int rank = 0;
  std::string error;
};

struct FetchOutcome {
  enum class Status { fetched, skipped, failed, cancelled };
  std::string site_id;
  std::string query;
  Status status = Status::fetched;
  std::size_t requested = 0;  // results returned by the provider
  std::size_t filtered = 0;   // dropped by the policy
  std::size_t selected = 0;   // survivors kept, at most max_images
  std::size_t saved = 0;
  std::size_t failed = 0;
  std::size_t files_written = 0;  // saved files whose bytes changed on disk
  std::vector<RankFailure> failures;
  std::string error;  // search failure message
  bool retryable = false;
};

std::string_view to_string(FetchOutcome::Status status);

/// Queries the provider, keeps photo-like results in rank order, downloads
/// the first max_images of them to <dest_root>/<site_id>/NN.jpg (ordinal =
/// position among survivors; a failed download leaves its ordinal missing)
/// and finally writes meta.json. Files are only rewritten when their bytes
/// change. Throws ProviderError when the search itself fails.
FetchOutcome fetch_descriptive_images(std::string_view url, std::string_view site_id,
                                      Provider& provider, const FetchPolicy& policy,
                                      const std::filesystem::path& dest_root,
                                      HostThrottle* throttle = nullptr);

struct BatchFetchReport {
  std::vector<FetchOutcome> outcomes;  // manifest order
  std::size_t count(FetchOutcome::Status status) const;
};

/// Fetches every record with up to max_concurrent sites in flight. Sites
/// whose directory already holds meta.json are skipped. A stop request lets
/// running sites finish and marks the rest cancelled.
BatchFetchReport batch_fetch(const DatasetManifest& manifest, Provider& provider,
                             const FetchPolicy& policy, const std::filesystem::path& dest_root,
                             std::stop_token stop = {});

std::string batch_report_json(const BatchFetchReport& report);

inline constexpr std::string_view kFetchMetaFile = "meta.json";

}  // namespace dimfuse
