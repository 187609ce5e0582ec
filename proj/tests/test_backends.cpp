#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "bridgescore/backends.hpp"

using namespace bridgescore;

namespace {

std::string spaced_tokens(std::size_t n, const std::string& prefix) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += prefix + std::to_string(i);
  }
  return out;
}

std::string tiled_block(std::size_t copies) {
  std::string block;
  for (int k = 0; k < 8; ++k) {
    if (k) block += ' ';
    block += "m" + std::to_string(k);
  }
  std::string out;
  for (std::size_t c = 0; c < copies; ++c) {
    if (c) out += ' ';
    out += block;
  }
  return out;
}

/// Scripted transport: plays back canned responses (the last one repeats),
/// counts posts, and tracks how many callers are inside post() at once.
struct FakeTransport : HttpTransport {
  std::vector<HttpResponse> script;
  int delay_ms = 0;

  std::atomic<int> posts{0};
  std::atomic<int> in_flight{0};
  std::atomic<int> peak_in_flight{0};
  std::mutex mutex;
  std::string last_path;
  std::string last_body;

  HttpResponse post(const std::string&, const std::string& path, const std::string& json_body,
                    double) override {
    const int index = posts.fetch_add(1);
    const int now = in_flight.fetch_add(1) + 1;
    int seen = peak_in_flight.load();
    while (now > seen && !peak_in_flight.compare_exchange_weak(seen, now)) {
    }
    if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    {
      std::lock_guard lock(mutex);
      last_path = path;
      last_body = json_body;
    }
    in_flight.fetch_sub(1);
    if (script.empty()) return {200, "{}", false};
    const std::size_t slot = std::min(static_cast<std::size_t>(index), script.size() - 1);
    return script[slot];
  }
};

BackendConfig http_config(int max_retries = 3, int max_in_flight = 8) {
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::http;
  cfg.endpoint = "http://inference-host:9000";
  cfg.timeout_s = 1.0;
  cfg.max_retries = max_retries;
  cfg.max_in_flight = max_in_flight;
  return cfg;
}

RetryPolicy recording_retry(std::vector<double>& sleeps, double base = 0.25) {
  RetryPolicy retry;
  retry.backoff_base_s = base;
  retry.sleep_fn = [&sleeps](double s) { sleeps.push_back(s); };
  return retry;
}

constexpr const char* kPassRaw = "VERDICT: PASS\nREASON_CODE: High Quality";

}  // namespace

TEST_CASE("backends: config validation") {
  CHECK(validate_backend_config(BackendConfig{}).empty());
  CHECK(validate_backend_config(http_config()).empty());

  BackendConfig bad;
  bad.kind = BackendConfig::Kind::http;  // no endpoint
  bad.timeout_s = 0.0;
  bad.max_retries = 0;
  bad.max_in_flight = 0;
  CHECK(validate_backend_config(bad).size() == 4);

  BackendConfig empty_endpoint = http_config();
  empty_endpoint.endpoint = "";
  CHECK(validate_backend_config(empty_endpoint).size() == 1);
}

TEST_CASE("backends: mock judge mirrors the deterministic rules") {
  MockJudge judge(98, RepetitionParams{});
  CHECK(judge.calls() == 0);

  JudgeRequest clean{"r1", spaced_tokens(150, "w"), "scope_v1"};
  CHECK(judge.judge(clean) == "VERDICT: PASS\nREASON_CODE: High Quality");

  JudgeRequest brief{"r2", spaced_tokens(50, "w"), "scope_v1"};
  CHECK(judge.judge(brief) == "VERDICT: FAIL\nREASON_CODE: Short description");

  JudgeRequest looping{"r3", tiled_block(5) + " " + spaced_tokens(70, "w"), "scope_v1"};
  CHECK(judge.judge(looping) == "VERDICT: FAIL\nREASON_CODE: Dirty or Noisy image");

  CHECK(judge.calls() == 3);
}

TEST_CASE("backends: mock embeddings are unit-norm, deterministic hash functions") {
  const std::vector<double> a = mock_embedding("girder crack near bearing", 768);
  REQUIRE(a.size() == 768);
  double norm_sq = 0.0;
  for (double x : a) norm_sq += x * x;
  CHECK(std::sqrt(norm_sq) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(a == mock_embedding("girder crack near bearing", 768));
  CHECK(a != mock_embedding("girder crack near bearings", 768));

  const std::vector<double> blank = mock_embedding("", 16);
  for (double x : blank) CHECK(x == doctest::Approx(1.0 / 4.0));

  const std::vector<double> b = mock_embedding("deck spalling", 768);
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  CHECK(dot > -1.0);
  CHECK(dot < 1.0);

  MockEmbeddings source(8);
  CHECK(source.dimension() == 8);
  auto rows = source.embed({"alpha", "beta", "alpha"});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].size() == 8);
  CHECK(rows[0] == rows[2]);
  CHECK(rows[0] != rows[1]);
}

TEST_CASE("backends: http_call returns the first success without sleeping") {
  FakeTransport transport;
  transport.script = {{200, "payload", false}};
  std::vector<double> sleeps;
  HttpResponse response =
      http_call(transport, http_config(), "/judge", "{}", recording_retry(sleeps), "r1");
  CHECK(response.status == 200);
  CHECK(response.body == "payload");
  CHECK(transport.posts.load() == 1);
  CHECK(sleeps.empty());
}

TEST_CASE("backends: transient failures retry with exponential backoff") {
  FakeTransport transport;
  transport.script = {{0, "", true}, {503, "busy", false}, {200, "ok", false}};
  std::vector<double> sleeps;
  HttpResponse response =
      http_call(transport, http_config(3), "/judge", "{}", recording_retry(sleeps, 0.25), "r1");
  CHECK(response.status == 200);
  CHECK(transport.posts.load() == 3);
  REQUIRE(sleeps.size() == 2);
  CHECK(sleeps[0] == doctest::Approx(0.25));
  CHECK(sleeps[1] == doctest::Approx(0.50));
}

TEST_CASE("backends: persistent timeout exhausts the attempt budget") {
  FakeTransport transport;
  transport.script = {{0, "", true}};
  std::vector<double> sleeps;
  try {
    http_call(transport, http_config(4), "/judge", "{}", recording_retry(sleeps), "r9");
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.kind() == BackendErrorKind::timeout);
    CHECK(e.request_id() == "r9");
  }
  CHECK(transport.posts.load() == 4);
  CHECK(sleeps.size() == 3);
}

TEST_CASE("backends: persistent server errors surface as status failures") {
  FakeTransport transport;
  transport.script = {{500, "boom", false}};
  std::vector<double> sleeps;
  try {
    http_call(transport, http_config(2), "/judge", "{}", recording_retry(sleeps), "r9");
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.kind() == BackendErrorKind::status);
  }
  CHECK(transport.posts.load() == 2);
}

TEST_CASE("backends: client errors are not retried") {
  FakeTransport transport;
  transport.script = {{404, "nope", false}};
  std::vector<double> sleeps;
  try {
    http_call(transport, http_config(5), "/missing", "{}", recording_retry(sleeps), "r2");
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.kind() == BackendErrorKind::status);
    CHECK(e.request_id() == "r2");
  }
  CHECK(transport.posts.load() == 1);
  CHECK(sleeps.empty());

  FakeTransport unused;
  BackendConfig no_endpoint;
  no_endpoint.kind = BackendConfig::Kind::http;
  CHECK_THROWS_AS(http_call(unused, no_endpoint, "/judge", "{}", RetryPolicy{}, "r3"),
                  BackendError);
  CHECK(unused.posts.load() == 0);
}

TEST_CASE("backends: http judge speaks the judge wire contract") {
  FakeTransport transport;
  transport.script = {{200, nlohmann::json{{"raw", kPassRaw}}.dump(), false}};
  HttpJudge judge(http_config(), transport);
  const std::string raw = judge.judge({"img0042", "a crack description", "scope_v1"});
  CHECK(raw == kPassRaw);

  CHECK(transport.last_path == "/judge");
  nlohmann::json body = nlohmann::json::parse(transport.last_body);
  CHECK(body["id"] == "img0042");
  CHECK(body["text"] == "a crack description");
  CHECK(body["scope_prompt_id"] == "scope_v1");
}

TEST_CASE("backends: http judge rejects malformed response bodies") {
  SUBCASE("not JSON at all") {
    FakeTransport transport;
    transport.script = {{200, "VERDICT: PASS", false}};
    HttpJudge judge(http_config(), transport);
    try {
      judge.judge({"img0001", "text", "scope_v1"});
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(e.kind() == BackendErrorKind::schema);
      CHECK(e.request_id() == "img0001");
    }
  }
  SUBCASE("missing the raw field") {
    FakeTransport transport;
    transport.script = {{200, R"({"verdict": "PASS"})", false}};
    HttpJudge judge(http_config(), transport);
    CHECK_THROWS_AS(judge.judge({"img0001", "text", "scope_v1"}), BackendError);
  }
}

TEST_CASE("backends: http embeddings validate shape before returning") {
  const std::vector<std::string> texts = {"alpha", "beta"};

  SUBCASE("happy path round-trips values and the request body") {
    FakeTransport transport;
    transport.script = {
        {200, R"({"vectors": [[1.0, 0.0, 0.0], [0.5, 0.25, -1.0]]})", false}};
    HttpEmbeddings source(http_config(), transport, 3);
    CHECK(source.dimension() == 3);
    auto out = source.embed(texts);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == std::vector<double>{1.0, 0.0, 0.0});
    CHECK(out[1][2] == doctest::Approx(-1.0));
    CHECK(transport.last_path == "/embed");
    nlohmann::json body = nlohmann::json::parse(transport.last_body);
    CHECK(body["texts"] == nlohmann::json(texts));
  }
  SUBCASE("row count must match the input") {
    FakeTransport transport;
    transport.script = {{200, R"({"vectors": [[1.0, 0.0, 0.0]]})", false}};
    HttpEmbeddings source(http_config(), transport, 3);
    try {
      source.embed(texts);
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(e.kind() == BackendErrorKind::schema);
      CHECK(e.request_id() == "embed:2");
    }
  }
  SUBCASE("every row must have the configured dimension") {
    FakeTransport transport;
    transport.script = {{200, R"({"vectors": [[1.0, 0.0], [0.5, 0.25]]})", false}};
    HttpEmbeddings source(http_config(), transport, 3);
    CHECK_THROWS_AS(source.embed(texts), BackendError);
  }
  SUBCASE("components must be numeric") {
    FakeTransport transport;
    transport.script = {{200, R"({"vectors": [["x", 0.0, 0.0], [0.5, 0.25, 1.0]]})", false}};
    HttpEmbeddings source(http_config(), transport, 3);
    CHECK_THROWS_AS(source.embed(texts), BackendError);
  }
}

TEST_CASE("backends: http inference echoes generation settings") {
  FakeTransport transport;
  transport.script = {{200, R"({"text": "a crack description"})", false}};
  HttpInference backend(http_config(), transport);
  InferenceRequest request;
  request.image_id = "img0007";
  request.prompt_id = "describe_v2";
  CHECK(backend.generate(request) == "a crack description");

  CHECK(transport.last_path == "/generate");
  nlohmann::json body = nlohmann::json::parse(transport.last_body);
  CHECK(body["image_id"] == "img0007");
  CHECK(body["prompt_id"] == "describe_v2");
  CHECK(body["max_new_tokens"] == 384);
  CHECK(body["repetition_penalty"] == doctest::Approx(1.2));

  FakeTransport empty;
  empty.script = {{200, "{}", false}};
  HttpInference failing(http_config(), empty);
  try {
    failing.generate(request);
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.kind() == BackendErrorKind::schema);
    CHECK(e.request_id() == "img0007");
  }
}

TEST_CASE("backends: the in-flight gate bounds concurrent requests") {
  FakeTransport transport;
  transport.script = {{200, nlohmann::json{{"raw", kPassRaw}}.dump(), false}};
  transport.delay_ms = 5;
  HttpJudge judge(http_config(3, 3), transport);

  std::vector<std::thread> threads;
  threads.reserve(16);
  for (int t = 0; t < 16; ++t)
    threads.emplace_back([&judge, t] {
      const std::string raw = judge.judge({"img" + std::to_string(t), "text", "scope_v1"});
      CHECK(raw == kPassRaw);
    });
  for (auto& thread : threads) thread.join();

  CHECK(transport.posts.load() == 16);
  CHECK(transport.peak_in_flight.load() <= 3);
  CHECK(transport.peak_in_flight.load() >= 1);
}
