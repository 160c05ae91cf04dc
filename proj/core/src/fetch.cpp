#include "dimfuse/fetch.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

#include <curl/curl.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "dimfuse/fsutil.hpp"
#include "dimfuse/image_stats.hpp"
#include "log.hpp"

namespace dimfuse {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(QueryMode mode) { return mode == QueryMode::url ? "url" : "domain"; }

QueryMode parse_query_mode(std::string_view text) {
  if (text == "url") return QueryMode::url;
  if (text == "domain") return QueryMode::domain;
  throw std::invalid_argument(fmt::format("unknown query mode '{}' (expected url or domain)", text));
}

void FetchPolicy::validate() const {
  if (max_images < 1 || max_images > 20) throw std::invalid_argument("max_images must be in 1..20");
  if (min_edge_px < 1) throw std::invalid_argument("min_edge_px must be >= 1");
  if (icon_square_max < 0) throw std::invalid_argument("icon_square_max must be >= 0");
  if (max_concurrent < 1) throw std::invalid_argument("max_concurrent must be >= 1");
  if (request_timeout.count() <= 0) throw std::invalid_argument("request_timeout must be positive");
  if (per_host_delay.count() < 0) throw std::invalid_argument("per_host_delay must be >= 0");
  if (allowed_mimes.empty()) throw std::invalid_argument("allowed_mimes is empty");
}

bool is_photo_like(const SearchResult& r, const FetchPolicy& policy) {
  std::string mime = r.mime;
  std::transform(mime.begin(), mime.end(), mime.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (!policy.allowed_mimes.contains(mime)) return false;
  const bool known = r.width > 0 && r.height > 0;
  if (!known) return true;
  if (r.width < policy.min_edge_px || r.height < policy.min_edge_px) return false;
  return !(r.width == r.height && r.width <= policy.icon_square_max);
}

std::string url_host(std::string_view url) {
  const auto scheme = url.find("://");
  if (scheme == std::string_view::npos) return "";
  std::string_view rest = url.substr(scheme + 3);
  rest = rest.substr(0, rest.find_first_of("/?#"));
  if (const auto at = rest.rfind('@'); at != std::string_view::npos) rest.remove_prefix(at + 1);
  if (!rest.empty() && rest.front() == '[') {
    rest = rest.substr(0, rest.find(']') + 1);
  } else {
    rest = rest.substr(0, rest.find(':'));
  }
  std::string host(rest);
  std::transform(host.begin(), host.end(), host.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return host;
}

void HostThrottle::acquire(const std::string& host) {
  if (delay_.count() <= 0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    auto& next = next_slot_[host];
    slot = std::max(now, next);
    next = slot + delay_;
  }
  std::this_thread::sleep_until(slot);
}

// ---------------------------------------------------------------- http

namespace {

void ensure_curl() {
  static std::once_flag once;
  std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

size_t append_body(char* data, size_t size, size_t count, void* user) {
  static_cast<std::string*>(user)->append(data, size * count);
  return size * count;
}

std::string http_get(const std::string& url, std::chrono::milliseconds timeout,
                     const std::string& header) {
  ensure_curl();
  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), curl_easy_cleanup);
  if (!curl) throw ProviderError("cannot create HTTP handle", true);
  std::unique_ptr<curl_slist, decltype(&curl_slist_free_all)> headers(nullptr, curl_slist_free_all);
  if (!header.empty()) headers.reset(curl_slist_append(nullptr, header.c_str()));

  std::string body;
  curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_NOSIGNAL, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT_MS, static_cast<long>(timeout.count()));
  curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, append_body);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &body);
  if (headers) curl_easy_setopt(curl.get(), CURLOPT_HTTPHEADER, headers.get());

  const CURLcode rc = curl_easy_perform(curl.get());
  if (rc == CURLE_OPERATION_TIMEDOUT) throw ProviderError(fmt::format("timeout fetching {}", url), true);
  if (rc != CURLE_OK) {
    throw ProviderError(fmt::format("{} fetching {}", curl_easy_strerror(rc), url), true);
  }
  long status = 0;
  curl_easy_getinfo(curl.get(), CURLINFO_RESPONSE_CODE, &status);
  if (status >= 400) {
    throw ProviderError(fmt::format("HTTP {} fetching {}", status, url), status >= 500 || status == 429);
  }
  return body;
}

std::string url_encode(std::string_view text) {
  ensure_curl();
  char* escaped = curl_easy_escape(nullptr, text.data(), static_cast<int>(text.size()));
  if (!escaped) throw std::bad_alloc();
  std::string out(escaped);
  curl_free(escaped);
  return out;
}

const json* json_at(const json& doc, std::string_view path) {
  const json* node = &doc;
  while (!path.empty()) {
    const auto dot = path.find('.');
    const std::string key(path.substr(0, dot));
    path = dot == std::string_view::npos ? std::string_view{} : path.substr(dot + 1);
    if (node->is_object()) {
      auto it = node->find(key);
      if (it == node->end()) return nullptr;
      node = &*it;
    } else if (node->is_array() && !key.empty() &&
               std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      const auto index = std::stoul(key);
      if (index >= node->size()) return nullptr;
      node = &(*node)[index];
    } else {
      return nullptr;
    }
  }
  return node;
}

int json_int(const json& item, const std::string& path, int fallback) {
  if (path.empty()) return fallback;
  const json* v = json_at(item, path);
  if (!v || v->is_null()) return fallback;
  if (v->is_number_integer()) return v->get<int>();
  if (v->is_number()) return static_cast<int>(v->get<double>());
  if (v->is_string()) {
    try {
      return std::stoi(v->get<std::string>());
    } catch (const std::exception&) {
      return fallback;
    }
  }
  return fallback;
}

std::string json_string(const json& item, const std::string& path) {
  if (path.empty()) return "";
  const json* v = json_at(item, path);
  return v && v->is_string() ? v->get<std::string>() : "";
}

}  // namespace

HttpProviderConfig parse_http_provider_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("provider config is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw ValidationError("provider config must be a JSON object");
  HttpProviderConfig cfg;
  auto take = [&](const char* key, std::string& field) {
    if (auto it = doc.find(key); it != doc.end()) {
      if (!it->is_string()) throw ValidationError(fmt::format("provider config '{}' must be a string", key));
      field = it->get<std::string>();
    }
  };
  take("endpoint", cfg.endpoint);
  take("auth_header", cfg.auth_header);
  take("auth_env", cfg.auth_env);
  take("results_path", cfg.results_path);
  if (auto it = doc.find("fields"); it != doc.end()) {
    if (!it->is_object()) throw ValidationError("provider config 'fields' must be an object");
    const json& f = *it;
    auto field = [&](const char* key, std::string& target) {
      if (auto jt = f.find(key); jt != f.end()) {
        if (!jt->is_string()) throw ValidationError(fmt::format("field path '{}' must be a string", key));
        target = jt->get<std::string>();
      }
    };
    field("rank", cfg.rank_field);
    field("url", cfg.url_field);
    field("width", cfg.width_field);
    field("height", cfg.height_field);
    field("mime", cfg.mime_field);
  }
  if (cfg.endpoint.find("{query}") == std::string::npos) {
    throw ValidationError("provider endpoint must contain {query}");
  }
  if (cfg.url_field.empty()) throw ValidationError("provider field 'url' must be mapped");
  if (cfg.auth_header.empty() != cfg.auth_env.empty()) {
    throw ValidationError("auth_header and auth_env must be given together");
  }
  return cfg;
}

HttpJsonProvider::HttpJsonProvider(HttpProviderConfig config, std::chrono::milliseconds search_timeout)
    : config_(std::move(config)), search_timeout_(search_timeout) {
  if (!config_.auth_env.empty()) {
    const char* value = std::getenv(config_.auth_env.c_str());
    if (!value || !*value) {
      throw ProviderError(fmt::format("credential variable {} is not set", config_.auth_env), false);
    }
    auth_value_ = value;
  }
}

std::vector<SearchResult> HttpJsonProvider::search(std::string_view query) {
  std::string url = config_.endpoint;
  url.replace(url.find("{query}"), 7, url_encode(query));
  const std::string header =
      config_.auth_header.empty() ? "" : fmt::format("{}: {}", config_.auth_header, auth_value_);
  const std::string body = http_get(url, search_timeout_, header);

  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProviderError(fmt::format("search response is not JSON: {}", e.what()), false);
  }
  const json* items = config_.results_path.empty() ? &doc : json_at(doc, config_.results_path);
  if (!items || !items->is_array()) {
    throw ProviderError(fmt::format("search response has no array at '{}'", config_.results_path), false);
  }
  std::vector<SearchResult> results;
  for (std::size_t i = 0; i < items->size(); ++i) {
    const json& item = (*items)[i];
    SearchResult r;
    r.rank = json_int(item, config_.rank_field, static_cast<int>(i) + 1);
    r.thumbnail_url = json_string(item, config_.url_field);
    r.width = std::max(0, json_int(item, config_.width_field, 0));
    r.height = std::max(0, json_int(item, config_.height_field, 0));
    r.mime = json_string(item, config_.mime_field);
    if (r.thumbnail_url.empty()) {
      throw ProviderError(fmt::format("search result {} has no thumbnail url", i + 1), false);
    }
    if (r.rank < 1 || (!results.empty() && r.rank <= results.back().rank)) {
      throw ProviderError("search result ranks are not strictly increasing", false);
    }
    results.push_back(std::move(r));
  }
  return results;
}

std::string HttpJsonProvider::download(const SearchResult& result, std::chrono::milliseconds timeout) {
  return http_get(result.thumbnail_url, timeout, "");
}

// ---------------------------------------------------------------- mock

namespace {

std::uint64_t fnv1a(std::uint64_t seed, std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(seed >> (8 * i)));
  for (char c : text) mix(static_cast<unsigned char>(c));
  return h;
}

std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string mock_url(std::string_view query, int rank) {
  return fmt::format("mock://thumb/{:016x}/{}", fnv1a(0, query), rank);
}

}  // namespace

MockProvider::MockProvider(std::uint64_t seed) : seed_(seed) {}

void MockProvider::set_scenario(const std::string& query, std::vector<Entry> entries) {
  std::lock_guard lock(mu_);
  for (auto& e : entries) {
    if (e.result.thumbnail_url.empty()) e.result.thumbnail_url = mock_url(query, e.result.rank);
    url_failures_[e.result.thumbnail_url] = e.failure;
  }
  scenarios_[query] = std::move(entries);
}

void MockProvider::set_search_failure(const std::string& query, bool retryable) {
  std::lock_guard lock(mu_);
  search_failures_[query] = retryable;
}

std::vector<MockProvider::Entry> MockProvider::scenario(std::string_view query) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = scenarios_.find(query); it != scenarios_.end()) return it->second;
  }
  // generated: 5..25 results, roughly one in ten an SVG and one in ten a small square icon
  std::uint64_t state = fnv1a(seed_, query);
  const int count = 5 + static_cast<int>(splitmix(state) % 21);
  std::vector<Entry> entries;
  for (int rank = 1; rank <= count; ++rank) {
    const std::uint64_t bits = splitmix(state);
    SearchResult r{rank, mock_url(query, rank), 0, 0, "image/jpeg"};
    switch (bits % 10) {
      case 0:
        r.width = r.height = 24;
        r.mime = "image/svg+xml";
        break;
      case 1:
        r.width = r.height = 96;
        r.mime = "image/png";
        break;
      default:
        r.width = 120 + static_cast<int>((bits >> 8) % 280);
        r.height = 90 + static_cast<int>((bits >> 24) % 210);
        if ((bits >> 40) % 5 == 0) r.mime = "image/png";
    }
    entries.push_back(Entry{std::move(r), Failure::none});
  }
  return entries;
}

std::vector<SearchResult> MockProvider::search(std::string_view query) {
  {
    std::lock_guard lock(mu_);
    if (auto it = search_failures_.find(query); it != search_failures_.end()) {
      throw ProviderError(fmt::format("mock search failure for '{}'", query), it->second);
    }
  }
  std::vector<SearchResult> out;
  for (auto& e : scenario(query)) out.push_back(std::move(e.result));
  return out;
}

std::string MockProvider::download(const SearchResult& result, std::chrono::milliseconds) {
  Failure failure = Failure::none;
  {
    std::lock_guard lock(mu_);
    if (auto it = url_failures_.find(result.thumbnail_url); it != url_failures_.end()) {
      failure = it->second;
    }
  }
  if (failure == Failure::timeout) {
    throw ProviderError(fmt::format("timeout fetching {}", result.thumbnail_url), true);
  }
  if (failure == Failure::http_error) {
    throw ProviderError(fmt::format("HTTP 404 fetching {}", result.thumbnail_url), false);
  }
  return thumbnail_bytes(result);
}

std::string MockProvider::thumbnail_bytes(const SearchResult& result) {
  const int w = result.width > 0 ? std::min(result.width, 1024) : 64;
  const int h = result.height > 0 ? std::min(result.height, 1024) : 64;
  return encode_placeholder_jpeg(w, h, static_cast<std::uint8_t>((result.rank * 37) % 256));
}

// ---------------------------------------------------------------- fetch

std::string_view to_string(FetchOutcome::Status status) {
  switch (status) {
    case FetchOutcome::Status::fetched:
      return "fetched";
    case FetchOutcome::Status::skipped:
      return "skipped";
    case FetchOutcome::Status::failed:
      return "failed";
    case FetchOutcome::Status::cancelled:
      return "cancelled";
  }
  return "unknown";
}

namespace {

/// Returns true when the file was (re)written.
bool write_if_changed(const fs::path& path, const std::string& bytes) {
  std::error_code ec;
  if (fs::is_regular_file(path, ec) && fs::file_size(path, ec) == bytes.size() && !ec) {
    try {
      if (read_file(path) == bytes) return false;
    } catch (const DomainError&) {
    }
  }
  write_file_atomic(path, bytes);
  return true;
}

}  // namespace

FetchOutcome fetch_descriptive_images(std::string_view url, std::string_view site_id,
                                      Provider& provider, const FetchPolicy& policy,
                                      const fs::path& dest_root, HostThrottle* throttle) {
  policy.validate();
  if (!is_directory_safe(site_id)) {
    throw ValidationError(fmt::format("site id '{}' is not a safe directory name", site_id));
  }
  FetchOutcome outcome;
  outcome.site_id = site_id;
  outcome.query = policy.query_mode == QueryMode::url ? std::string(url) : url_host(url);
  if (outcome.query.empty()) throw ValidationError(fmt::format("no host in url '{}'", url));

  const std::vector<SearchResult> results = provider.search(outcome.query);
  outcome.requested = results.size();

  std::vector<SearchResult> survivors;
  for (const auto& r : results) {
    if (is_photo_like(r, policy)) {
      survivors.push_back(r);
    } else {
      ++outcome.filtered;
    }
  }
  if (survivors.size() > static_cast<std::size_t>(policy.max_images)) {
    survivors.resize(static_cast<std::size_t>(policy.max_images));
  }
  outcome.selected = survivors.size();

  const fs::path dir = dest_root / std::string(site_id);
  fs::create_directories(dir);
  auto log = log::get();

  json images = json::array();
  json failures = json::array();
  std::set<int> saved_ordinals;
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    const auto& r = survivors[i];
    const int ordinal = static_cast<int>(i) + 1;
    try {
      if (throttle) throttle->acquire(url_host(r.thumbnail_url));
      const std::string bytes = provider.download(r, policy.request_timeout);
      if (bytes.empty()) throw ProviderError("empty thumbnail body", true);
      if (write_if_changed(dir / image_name_for_ordinal(ordinal), bytes)) ++outcome.files_written;
      saved_ordinals.insert(ordinal);
      ++outcome.saved;
      images.push_back({{"ordinal", ordinal},
                        {"rank", r.rank},
                        {"source_url", r.thumbnail_url},
                        {"width", r.width},
                        {"height", r.height},
                        {"mime", r.mime}});
    } catch (const ProviderError& e) {
      ++outcome.failed;
      outcome.failures.push_back(RankFailure{ordinal, r.rank, e.what()});
      failures.push_back({{"ordinal", ordinal},
                          {"rank", r.rank},
                          {"source_url", r.thumbnail_url},
                          {"error", e.what()},
                          {"retryable", e.retryable()}});
      log->warn("module=fetch event=download_failed site_id={} rank={} ordinal={} error=\"{}\"",
                site_id, r.rank, ordinal, e.what());
    }
  }

  // images left over from an earlier, different result set would break the rank mapping
  for (int ordinal : list_image_ordinals(dir)) {
    if (!saved_ordinals.contains(ordinal)) fs::remove(dir / image_name_for_ordinal(ordinal));
  }

  json meta = {{"site_id", site_id},
               {"url", url},
               {"query", outcome.query},
               {"query_mode", to_string(policy.query_mode)},
               {"counts",
                {{"requested", outcome.requested},
                 {"filtered", outcome.filtered},
                 {"selected", outcome.selected},
                 {"saved", outcome.saved},
                 {"failed", outcome.failed}}},
               {"images", std::move(images)},
               {"failures", std::move(failures)}};
  if (write_if_changed(dir / std::string(kFetchMetaFile), meta.dump(1) + "\n")) ++outcome.files_written;
  log->info("module=fetch event=site_done site_id={} requested={} filtered={} saved={} failed={}",
            site_id, outcome.requested, outcome.filtered, outcome.saved, outcome.failed);
  return outcome;
}

std::size_t BatchFetchReport::count(FetchOutcome::Status status) const {
  return static_cast<std::size_t>(std::count_if(
      outcomes.begin(), outcomes.end(), [status](const auto& o) { return o.status == status; }));
}

BatchFetchReport batch_fetch(const DatasetManifest& manifest, Provider& provider,
                             const FetchPolicy& policy, const fs::path& dest_root,
                             std::stop_token stop) {
  policy.validate();
  BatchFetchReport report;
  report.outcomes.resize(manifest.records.size());
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    report.outcomes[i].site_id = manifest.records[i].site_id;
    report.outcomes[i].status = FetchOutcome::Status::cancelled;
  }
  HostThrottle throttle(policy.per_host_delay);
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    while (!stop.stop_requested()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= manifest.records.size()) return;
      const auto& record = manifest.records[i];
      FetchOutcome& out = report.outcomes[i];
      std::error_code ec;
      if (fs::exists(dest_root / record.site_id / std::string(kFetchMetaFile), ec)) {
        out.status = FetchOutcome::Status::skipped;
        continue;
      }
      try {
        out = fetch_descriptive_images(record.url, record.site_id, provider, policy, dest_root,
                                       &throttle);
        out.status = FetchOutcome::Status::fetched;
      } catch (const ProviderError& e) {
        out.status = FetchOutcome::Status::failed;
        out.error = e.what();
        out.retryable = e.retryable();
        log::get()->warn("module=fetch event=site_failed site_id={} retryable={} error=\"{}\"",
                         record.site_id, e.retryable(), e.what());
      } catch (const std::exception& e) {
        out.status = FetchOutcome::Status::failed;
        out.error = e.what();
        log::get()->warn("module=fetch event=site_failed site_id={} error=\"{}\"", record.site_id,
                         e.what());
      }
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(policy.max_concurrent, std::max<std::size_t>(1, manifest.records.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return report;
}

std::string batch_report_json(const BatchFetchReport& report) {
  json sites = json::array();
  for (const auto& o : report.outcomes) {
    json site = {{"site_id", o.site_id}, {"status", to_string(o.status)}};
    if (o.status == FetchOutcome::Status::fetched) {
      site["counts"] = {{"requested", o.requested}, {"filtered", o.filtered},
                        {"selected", o.selected},   {"saved", o.saved},
                        {"failed", o.failed}};
      site["files_written"] = o.files_written;
    }
    if (!o.error.empty()) {
      site["error"] = o.error;
      site["retryable"] = o.retryable;
    }
    sites.push_back(std::move(site));
  }
  json doc = {{"fetched", report.count(FetchOutcome::Status::fetched)},
              {"skipped", report.count(FetchOutcome::Status::skipped)},
              {"failed", report.count(FetchOutcome::Status::failed)},
              {"cancelled", report.count(FetchOutcome::Status::cancelled)},
              {"sites", std::move(sites)}};
  return doc.dump(1) + "\n";
}

}  // namespace dimfuse
