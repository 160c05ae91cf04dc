#include <cstdlib>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dimfuse/fetch.hpp"
#include "dimfuse/fsutil.hpp"
#include "dimfuse/image_stats.hpp"
#include "support.hpp"

namespace dimfuse {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using std::chrono::milliseconds;

TEST(PhotoLike, PolicyPredicate) {
  const FetchPolicy policy;
  EXPECT_TRUE(is_photo_like({1, "u", 200, 150, "image/jpeg"}, policy));
  EXPECT_TRUE(is_photo_like({1, "u", 200, 150, "IMAGE/PNG"}, policy));
  EXPECT_FALSE(is_photo_like({1, "u", 200, 150, "image/svg+xml"}, policy));
  EXPECT_FALSE(is_photo_like({1, "u", 200, 150, "image/gif"}, policy));
  EXPECT_FALSE(is_photo_like({1, "u", 63, 150, "image/jpeg"}, policy));
  EXPECT_TRUE(is_photo_like({1, "u", 64, 64 + 1, "image/jpeg"}, policy));
  EXPECT_FALSE(is_photo_like({1, "u", 128, 128, "image/png"}, policy));
  EXPECT_TRUE(is_photo_like({1, "u", 129, 129, "image/png"}, policy));
  EXPECT_TRUE(is_photo_like({1, "u", 0, 0, "image/webp"}, policy));
}

TEST(PhotoLike, PureFunctionOfMetadata) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> dim(0, 400);
  const std::vector<std::string> mimes = {"image/jpeg", "image/png", "image/svg+xml", "text/html", "image/webp"};
  const FetchPolicy policy;
  for (int i = 0; i < 2000; ++i) {
    SearchResult r{i + 1, "u" + std::to_string(i), dim(rng), dim(rng), mimes[static_cast<std::size_t>(i) % 5]};
    SearchResult same = r;
    same.rank = 7;
    same.thumbnail_url = "elsewhere";
    EXPECT_EQ(is_photo_like(r, policy), is_photo_like(same, policy));
  }
}

TEST(FetchPolicy, Validation) {
  FetchPolicy p;
  EXPECT_NO_THROW(p.validate());
  p.max_images = 21;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.max_images = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = FetchPolicy{};
  p.min_edge_px = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = FetchPolicy{};
  p.max_concurrent = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_EQ(parse_query_mode("domain"), QueryMode::domain);
  EXPECT_THROW(parse_query_mode("title"), std::invalid_argument);
}

TEST(UrlHost, Parsing) {
  EXPECT_EQ(url_host("https://Example.COM/path?q=1"), "example.com");
  EXPECT_EQ(url_host("http://user@host.net:8080/x"), "host.net");
  EXPECT_EQ(url_host("http://[::1]:80/"), "[::1]");
  EXPECT_EQ(url_host("no-scheme"), "");
}

TEST(HostThrottle, SpacesRequestsToOneHost) {
  HostThrottle throttle(milliseconds(30));
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 4; ++i) throttle.acquire("h");
  throttle.acquire("other");
  EXPECT_GE(std::chrono::steady_clock::now() - start, milliseconds(90));
}

class FetchTest : public ::testing::Test {
 protected:
  testing::TempDir dir;
  MockProvider provider;
  FetchPolicy policy;

  void SetUp() override { testing::install_fetch_scenarios(provider); }

  FetchOutcome fetch(int site) {
    char id[16];
    std::snprintf(id, sizeof id, "fetch_%02d", site);
    return fetch_descriptive_images(std::string("https://") + id + ".example.net/", id, provider, policy,
                                    dir.path());
  }
  json meta(const std::string& site) { return json::parse(read_file(dir / (site + "/meta.json"))); }
};

TEST_F(FetchTest, FiltersIconsAndCapsAtTwenty) {
  const auto o = fetch(1);
  EXPECT_EQ(o.requested, 25u);
  EXPECT_EQ(o.filtered, 3u);
  EXPECT_EQ(o.saved, 20u);
  EXPECT_EQ(o.failed, 0u);
  std::vector<int> all(20);
  std::iota(all.begin(), all.end(), 1);
  EXPECT_EQ(list_image_ordinals(dir / "fetch_01"), all);

  // rank order preserved: ordinal i holds the i-th surviving rank (3, 11 and 19 were dropped)
  const auto m = meta("fetch_01");
  std::vector<int> ranks;
  for (const auto& img : m["images"]) ranks.push_back(img["rank"]);
  EXPECT_EQ(ranks, (std::vector<int>{1, 2, 4, 5, 6, 7, 8, 9, 10, 12, 13, 14, 15, 16, 17, 18, 20, 21, 22, 23}));
  EXPECT_EQ(m["counts"]["filtered"], 3);
  EXPECT_EQ(m["query_mode"], "url");
  EXPECT_EQ(read_image_size(dir / "fetch_01/05.jpg"), (ImageSize{160 + 7 * 6, 120 + 3 * 6}));
}

TEST_F(FetchTest, ShortResultListSavesWhatExists) {
  const auto o = fetch(2);
  EXPECT_EQ(o.saved, 7u);
  EXPECT_EQ(list_image_ordinals(dir / "fetch_02"), (std::vector<int>{1, 2, 3, 4, 5, 6, 7}));
}

TEST_F(FetchTest, FailedDownloadLeavesOrdinalGap) {
  const auto o = fetch(3);
  EXPECT_EQ(o.saved, 11u);
  EXPECT_EQ(o.failed, 1u);
  ASSERT_EQ(o.failures.size(), 1u);
  EXPECT_EQ(o.failures[0].ordinal, 5);
  EXPECT_EQ(o.failures[0].rank, 5);
  EXPECT_EQ(list_image_ordinals(dir / "fetch_03"), (std::vector<int>{1, 2, 3, 4, 6, 7, 8, 9, 10, 11, 12}));
  EXPECT_EQ(meta("fetch_03")["failures"][0]["retryable"], true);

  const auto mixed = fetch(4);
  EXPECT_EQ(mixed.filtered, 4u);
  EXPECT_EQ(mixed.saved, 9u);
  EXPECT_EQ(list_image_ordinals(dir / "fetch_04"), (std::vector<int>{1, 2, 3, 4, 5, 6, 8, 9, 10}));
}

TEST_F(FetchTest, SearchFailureIsTypedWithRetryHint) {
  try {
    fetch(5);
    FAIL() << "expected ProviderError";
  } catch (const ProviderError& e) {
    EXPECT_TRUE(e.retryable());
  }
  EXPECT_FALSE(fs::exists(dir / "fetch_05/meta.json"));
}

TEST_F(FetchTest, RefetchRewritesNothing) {
  const auto first = fetch(1);
  EXPECT_EQ(first.files_written, 21u);
  const auto before = testing::snapshot_tree(dir.path());
  EXPECT_EQ(fetch(1).files_written, 0u);
  EXPECT_EQ(testing::snapshot_tree(dir.path()), before);
}

TEST_F(FetchTest, StaleImagesAreRemoved) {
  write_file_atomic(dir / "fetch_02/15.jpg", "stale");
  fetch(2);
  EXPECT_EQ(list_image_ordinals(dir / "fetch_02").back(), 7);
}

TEST_F(FetchTest, MaxImagesAndDomainQuery) {
  policy.max_images = 5;
  policy.query_mode = QueryMode::domain;
  const auto o = fetch_descriptive_images("https://www.example.org/a/b", "dom", provider, policy, dir.path());
  EXPECT_EQ(o.query, "www.example.org");
  EXPECT_LE(o.saved, 5u);
  EXPECT_EQ(meta("dom")["query_mode"], "domain");
  EXPECT_THROW(fetch_descriptive_images("https://x/", "../evil", provider, policy, dir.path()), ValidationError);
}

TEST_F(FetchTest, BatchIsResumableAndOrdered) {
  const auto manifest = testing::fetch_manifest();
  const auto report = batch_fetch(manifest, provider, policy, dir.path());
  ASSERT_EQ(report.outcomes.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(report.outcomes[i].site_id, manifest.records[i].site_id);
  EXPECT_EQ(report.count(FetchOutcome::Status::fetched), 11u);
  EXPECT_EQ(report.count(FetchOutcome::Status::failed), 1u);
  EXPECT_TRUE(report.outcomes[4].retryable);

  const auto again = batch_fetch(manifest, provider, policy, dir.path());
  EXPECT_EQ(again.count(FetchOutcome::Status::skipped), 11u);
  EXPECT_EQ(again.count(FetchOutcome::Status::failed), 1u);
  const auto doc = json::parse(batch_report_json(again));
  EXPECT_EQ(doc["skipped"], 11);
  EXPECT_EQ(doc["sites"][4]["status"], "failed");
}

TEST_F(FetchTest, StopRequestCancelsRemainingSites) {
  std::stop_source stop;
  stop.request_stop();
  const auto report = batch_fetch(testing::fetch_manifest(), provider, policy, dir.path(), stop.get_token());
  EXPECT_EQ(report.count(FetchOutcome::Status::cancelled), 12u);
  EXPECT_TRUE(testing::snapshot_tree(dir.path()).empty());
}

TEST(MockProvider, GeneratedScenariosAreStable) {
  MockProvider a(1), b(1), c(2);
  EXPECT_EQ(a.search("https://q.example/"), b.search("https://q.example/"));
  EXPECT_NE(a.search("https://q.example/"), c.search("https://q.example/"));
  const auto results = a.search("https://q.example/");
  ASSERT_FALSE(results.empty());
  EXPECT_EQ(a.download(results[0], milliseconds(10)), MockProvider::thumbnail_bytes(results[0]));
}

TEST(ProviderConfig, ParsesFieldMapping) {
  const auto cfg = parse_http_provider_config(R"({
    "endpoint": "https://search.example/api?q={query}",
    "auth_header": "X-Key", "auth_env": "SEARCH_KEY",
    "results_path": "data.items",
    "fields": {"rank": "pos", "url": "thumb.link", "width": "w", "height": "h", "mime": "type"}})");
  EXPECT_EQ(cfg.results_path, "data.items");
  EXPECT_EQ(cfg.url_field, "thumb.link");
  EXPECT_EQ(cfg.rank_field, "pos");
  EXPECT_THROW(parse_http_provider_config(R"({"endpoint": "https://x/"})"), ValidationError);
  EXPECT_THROW(parse_http_provider_config(R"({"endpoint": "https://x/{query}", "auth_header": "K"})"),
               ValidationError);
  EXPECT_THROW(parse_http_provider_config("nope"), ValidationError);
}

class HttpFetchTest : public ::testing::Test {
 protected:
  MockProvider backing;
  std::unique_ptr<testing::MockSearchServer> server;
  testing::TempDir dir;

  void SetUp() override {
    testing::install_fetch_scenarios(backing);
    server = std::make_unique<testing::MockSearchServer>(backing, milliseconds(600));
    ::setenv(testing::MockSearchServer::kAuthEnv, testing::MockSearchServer::kApiKey, 1);
  }
};

TEST_F(HttpFetchTest, SearchMapsFieldsAndPreservesRank) {
  HttpJsonProvider provider(server->provider_config());
  const auto results = provider.search("https://fetch_01.example.net/");
  ASSERT_EQ(results.size(), 25u);
  EXPECT_EQ(results[2].mime, "image/svg+xml");
  EXPECT_EQ(results[4].width, 160 + 7 * 5);
  EXPECT_EQ(results[4].rank, 5);
  EXPECT_EQ(provider.download(results[0], milliseconds(2000)), MockProvider::thumbnail_bytes(results[0]));
}

TEST_F(HttpFetchTest, TimeoutAndErrorsAreTyped) {
  HttpJsonProvider provider(server->provider_config());
  const auto results = provider.search("https://fetch_03.example.net/");
  try {
    provider.download(results[4], milliseconds(150));
    FAIL() << "expected timeout";
  } catch (const ProviderError& e) {
    EXPECT_TRUE(e.retryable());
    EXPECT_NE(std::string(e.what()).find("timeout"), std::string::npos);
  }
  try {
    provider.search("https://fetch_05.example.net/");
    FAIL() << "expected server error";
  } catch (const ProviderError& e) {
    EXPECT_TRUE(e.retryable());
    EXPECT_NE(std::string(e.what()).find("HTTP 503"), std::string::npos);
  }
}

TEST_F(HttpFetchTest, MissingOrWrongCredential) {
  ::setenv(testing::MockSearchServer::kAuthEnv, "wrong", 1);
  HttpJsonProvider provider(server->provider_config());
  try {
    provider.search("https://fetch_01.example.net/");
    FAIL() << "expected 401";
  } catch (const ProviderError& e) {
    EXPECT_FALSE(e.retryable());
  }
  ::unsetenv(testing::MockSearchServer::kAuthEnv);
  EXPECT_THROW(HttpJsonProvider{server->provider_config()}, ProviderError);
}

TEST_F(HttpFetchTest, BatchOverHttpMatchesInProcessMock) {
  FetchPolicy policy;
  policy.request_timeout = milliseconds(250);
  policy.max_concurrent = 4;
  HttpJsonProvider provider(server->provider_config());
  const auto report = batch_fetch(testing::fetch_manifest(), provider, policy, dir / "http");
  EXPECT_EQ(report.count(FetchOutcome::Status::fetched), 11u);

  MockProvider local;
  testing::install_fetch_scenarios(local);
  batch_fetch(testing::fetch_manifest(), local, policy, dir / "local");
  // same images and layout; meta.json differs only in the thumbnail URLs
  auto http_tree = testing::snapshot_tree(dir / "http");
  auto local_tree = testing::snapshot_tree(dir / "local");
  ASSERT_EQ(http_tree.size(), local_tree.size());
  for (const auto& [path, bytes] : local_tree) {
    ASSERT_TRUE(http_tree.contains(path)) << path;
    if (path.ends_with(".jpg")) EXPECT_EQ(http_tree[path], bytes) << path;
  }
}

}  // namespace
}  // namespace dimfuse
