#include "bridgescore/backends.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "json.hpp"

#include "httplib.h"

#include "bridgescore/stats.hpp"
#include "bridgescore/tokenize.hpp"

namespace bridgescore {

std::vector<std::string> validate_backend_config(const BackendConfig& cfg) {
  std::vector<std::string> problems;
  if (cfg.kind == BackendConfig::Kind::http && (!cfg.endpoint || cfg.endpoint->empty()))
    problems.push_back("http backend requires an endpoint");
  if (!(cfg.timeout_s > 0.0)) problems.push_back("timeout must be positive");
  if (cfg.max_retries < 1) problems.push_back("max_retries must be >= 1 (it counts attempts)");
  if (cfg.max_in_flight < 1) problems.push_back("max_in_flight must be >= 1");
  return problems;
}

std::string MockJudge::judge(const JudgeRequest& request) {
  calls_.fetch_add(1);
  if (count_tokens(request.text) < theta_low_)
    return "VERDICT: FAIL\nREASON_CODE: Short description";
  if (detect_repetition(request.text, repetition_).flag)
    return "VERDICT: FAIL\nREASON_CODE: Dirty or Noisy image";
  return "VERDICT: PASS\nREASON_CODE: High Quality";
}

std::vector<double> mock_embedding(const std::string& text, std::size_t dimension) {
  std::vector<double> v(dimension, 0.0);
  if (dimension == 0) return v;
  const double equal = 1.0 / std::sqrt(static_cast<double>(dimension));
  if (text.empty()) {
    for (double& x : v) x = equal;
    return v;
  }
  std::uint64_t state = fnv1a64_str(text);
  double norm_sq = 0.0;
  for (double& x : v) {
    const std::uint64_t z = splitmix64(state);
    const double unit = static_cast<double>(z >> 11) * 0x1.0p-53;  // [0,1)
    x = 2.0 * unit - 1.0;
    norm_sq += x * x;
  }
  const double norm = std::sqrt(norm_sq);
  if (norm < 1e-12) {
    for (double& x : v) x = equal;
    return v;
  }
  for (double& x : v) x /= norm;
  return v;
}

std::vector<std::vector<double>> MockEmbeddings::embed(const std::vector<std::string>& texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& text : texts) out.push_back(mock_embedding(text, dimension_));
  return out;
}

HttpResponse DefaultHttpTransport::post(const std::string& endpoint, const std::string& path,
                                        const std::string& json_body, double timeout_s) {
  httplib::Client client(endpoint);
  const auto whole = std::chrono::duration<double>(timeout_s);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(whole));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(whole));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(whole));

  auto result = client.Post(path, json_body, "application/json");
  if (!result) {
    HttpResponse response;
    response.timed_out = true;
    return response;
  }
  return {result->status, result->body, false};
}

void InFlightGate::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return available_ > 0; });
  --available_;
}

void InFlightGate::release() {
  {
    std::lock_guard lock(mutex_);
    ++available_;
  }
  cv_.notify_one();
}

namespace {

struct GateGuard {
  explicit GateGuard(InFlightGate& gate) : gate_(gate) { gate_.acquire(); }
  ~GateGuard() { gate_.release(); }
  InFlightGate& gate_;
};

void default_sleep(double seconds) {
  std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

nlohmann::json parse_json_body(const std::string& body, const std::string& request_id) {
  nlohmann::json parsed = nlohmann::json::parse(body, nullptr, false);
  if (parsed.is_discarded())
    throw BackendError(BackendErrorKind::schema, request_id,
                       "response body is not JSON (request " + request_id + ")");
  return parsed;
}

}  // namespace

HttpResponse http_call(HttpTransport& transport, const BackendConfig& cfg,
                       const std::string& path, const std::string& json_body,
                       const RetryPolicy& retry, const std::string& request_id) {
  if (!cfg.endpoint || cfg.endpoint->empty())
    throw BackendError(BackendErrorKind::status, request_id,
                       "no endpoint configured (request " + request_id + ")");
  const auto sleep_fn = retry.sleep_fn ? retry.sleep_fn : default_sleep;

  HttpResponse last;
  for (int attempt = 1; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 1)
      sleep_fn(retry.backoff_base_s * std::pow(2.0, static_cast<double>(attempt - 2)));
    last = transport.post(*cfg.endpoint, path, json_body, cfg.timeout_s);
    if (last.timed_out) continue;       // transient
    if (last.status >= 500) continue;   // transient
    if (last.status == 200) return last;
    throw BackendError(BackendErrorKind::status, request_id,
                       "HTTP " + std::to_string(last.status) + " from " + path + " (request " +
                           request_id + ")");
  }
  if (last.timed_out)
    throw BackendError(BackendErrorKind::timeout, request_id,
                       "timed out after " + std::to_string(cfg.max_retries) +
                           " attempts on " + path + " (request " + request_id + ")");
  throw BackendError(BackendErrorKind::status, request_id,
                     "HTTP " + std::to_string(last.status) + " persisted across " +
                         std::to_string(cfg.max_retries) + " attempts on " + path +
                         " (request " + request_id + ")");
}

HttpJudge::HttpJudge(BackendConfig cfg, HttpTransport& transport, RetryPolicy retry)
    : cfg_(std::move(cfg)), transport_(transport), retry_(std::move(retry)),
      gate_(cfg_.max_in_flight) {}

std::string HttpJudge::judge(const JudgeRequest& request) {
  GateGuard in_flight(gate_);
  nlohmann::json body = {{"id", request.id},
                         {"text", request.text},
                         {"scope_prompt_id", request.scope_prompt_id}};
  HttpResponse response = http_call(transport_, cfg_, "/judge", body.dump(), retry_, request.id);
  nlohmann::json parsed = parse_json_body(response.body, request.id);
  if (!parsed.is_object() || !parsed.contains("raw") || !parsed["raw"].is_string())
    throw BackendError(BackendErrorKind::schema, request.id,
                       "judge response missing string field 'raw' (request " + request.id + ")");
  return parsed["raw"].get<std::string>();
}

HttpEmbeddings::HttpEmbeddings(BackendConfig cfg, HttpTransport& transport,
                               std::size_t dimension, RetryPolicy retry)
    : cfg_(std::move(cfg)), transport_(transport), retry_(std::move(retry)),
      dimension_(dimension), gate_(cfg_.max_in_flight) {}

std::vector<std::vector<double>> HttpEmbeddings::embed(const std::vector<std::string>& texts) {
  GateGuard in_flight(gate_);
  const std::string request_id = "embed:" + std::to_string(texts.size());
  nlohmann::json body = {{"texts", texts}};
  HttpResponse response = http_call(transport_, cfg_, "/embed", body.dump(), retry_, request_id);
  nlohmann::json parsed = parse_json_body(response.body, request_id);
  if (!parsed.is_object() || !parsed.contains("vectors") || !parsed["vectors"].is_array())
    throw BackendError(BackendErrorKind::schema, request_id,
                       "embedding response missing array field 'vectors' (request " +
                           request_id + ")");
  const auto& rows = parsed["vectors"];
  if (rows.size() != texts.size())
    throw BackendError(BackendErrorKind::schema, request_id,
                       "embedding response has " + std::to_string(rows.size()) +
                           " vectors for " + std::to_string(texts.size()) +
                           " texts (request " + request_id + ")");
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != dimension_)
      throw BackendError(BackendErrorKind::schema, request_id,
                         "embedding vector has wrong dimension (request " + request_id + ")");
    std::vector<double> v;
    v.reserve(dimension_);
    for (const auto& component : row) {
      if (!component.is_number())
        throw BackendError(BackendErrorKind::schema, request_id,
                           "embedding vector has a non-numeric component (request " +
                               request_id + ")");
      v.push_back(component.get<double>());
    }
    out.push_back(std::move(v));
  }
  return out;
}

HttpInference::HttpInference(BackendConfig cfg, HttpTransport& transport, RetryPolicy retry)
    : cfg_(std::move(cfg)), transport_(transport), retry_(std::move(retry)),
      gate_(cfg_.max_in_flight) {}

std::string HttpInference::generate(const InferenceRequest& request) {
  GateGuard in_flight(gate_);
  nlohmann::json body = {{"image_id", request.image_id},
                         {"prompt_id", request.prompt_id},
                         {"max_new_tokens", request.max_new_tokens},
                         {"repetition_penalty", request.repetition_penalty}};
  HttpResponse response =
      http_call(transport_, cfg_, "/generate", body.dump(), retry_, request.image_id);
  nlohmann::json parsed = parse_json_body(response.body, request.image_id);
  if (!parsed.is_object() || !parsed.contains("text") || !parsed["text"].is_string())
    throw BackendError(BackendErrorKind::schema, request.image_id,
                       "inference response missing string field 'text' (request " +
                           request.image_id + ")");
  return parsed["text"].get<std::string>();
}

}  // namespace bridgescore
