#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "bridgescore/backend_iface.hpp"
#include "bridgescore/guard.hpp"

namespace bridgescore {

/// Deterministic stand-in judge. It re-applies the stage-1 token window and
/// repetition rule to the text it receives, so everything stage 1 lets
/// through — overlong text included — comes back PASS / High Quality.
/// The call counter makes short-circuit behaviour observable in tests.
class MockJudge : public JudgeBackend {
 public:
  MockJudge(std::size_t theta_low, RepetitionParams repetition)
      : theta_low_(theta_low), repetition_(repetition) {}
  explicit MockJudge(const GuardConfig& cfg) : MockJudge(cfg.theta_low, cfg.repetition) {}

  std::string judge(const JudgeRequest& request) override;

  std::uint64_t calls() const { return calls_.load(); }

 private:
  std::size_t theta_low_;
  RepetitionParams repetition_;
  std::atomic<std::uint64_t> calls_{0};
};

/// One deterministic hash-seeded vector: components in [-1,1), L2-normalized.
/// Empty text maps to the all-equal unit vector (1/sqrt(D), ..., 1/sqrt(D)).
std::vector<double> mock_embedding(const std::string& text, std::size_t dimension);

class MockEmbeddings : public EmbeddingSource {
 public:
  explicit MockEmbeddings(std::size_t dimension = 768) : dimension_(dimension) {}

  std::size_t dimension() const override { return dimension_; }
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

 private:
  std::size_t dimension_;
};

struct HttpResponse {
  int status = 0;
  std::string body;
  bool timed_out = false;
};

/// One POST to `endpoint` + `path`. Swap in a fake for fault-injection tests.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& endpoint, const std::string& path,
                            const std::string& json_body, double timeout_s) = 0;
};

/// Transport over the vendored HTTP client.
class DefaultHttpTransport : public HttpTransport {
 public:
  HttpResponse post(const std::string& endpoint, const std::string& path,
                    const std::string& json_body, double timeout_s) override;
};

struct RetryPolicy {
  // Sleep before retry k (k >= 1) is backoff_base_s * 2^(k-1).
  double backoff_base_s = 0.1;
  // Injectable for tests; the default really sleeps.
  std::function<void(double)> sleep_fn;
};

/// POST with retries on transient failures (timeouts and 5xx responses) up
/// to cfg.max_retries total attempts, exponential backoff between them.
/// Throws BackendError (timeout / status / schema) tagged with request_id.
HttpResponse http_call(HttpTransport& transport, const BackendConfig& cfg,
                       const std::string& path, const std::string& json_body,
                       const RetryPolicy& retry, const std::string& request_id);

/// Keeps at most `limit` callers inside the guarded section.
class InFlightGate {
 public:
  explicit InFlightGate(int limit) : available_(limit) {}

  void acquire();
  void release();

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int available_;
};

class HttpJudge : public JudgeBackend {
 public:
  HttpJudge(BackendConfig cfg, HttpTransport& transport, RetryPolicy retry = {});

  std::string judge(const JudgeRequest& request) override;

 private:
  BackendConfig cfg_;
  HttpTransport& transport_;
  RetryPolicy retry_;
  InFlightGate gate_;
};

class HttpEmbeddings : public EmbeddingSource {
 public:
  HttpEmbeddings(BackendConfig cfg, HttpTransport& transport, std::size_t dimension = 768,
                 RetryPolicy retry = {});

  std::size_t dimension() const override { return dimension_; }
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

 private:
  BackendConfig cfg_;
  HttpTransport& transport_;
  RetryPolicy retry_;
  std::size_t dimension_;
  InFlightGate gate_;
};

class HttpInference : public InferenceBackend {
 public:
  HttpInference(BackendConfig cfg, HttpTransport& transport, RetryPolicy retry = {});

  std::string generate(const InferenceRequest& request) override;

 private:
  BackendConfig cfg_;
  HttpTransport& transport_;
  RetryPolicy retry_;
  InFlightGate gate_;
};

}  // namespace bridgescore
