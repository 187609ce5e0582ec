#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bridgescore {

struct JudgeRequest {
  std::string id;
  std::string text;
  std::string scope_prompt_id;
};

/// Emits the raw two-line verdict text for one description. The guard module
/// owns all protocol parsing; implementations just move strings around.
/// Implementations must tolerate concurrent calls.
class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;
  virtual std::string judge(const JudgeRequest& request) = 0;
};

/// Turns texts into fixed-dimension sentence vectors, one per input, in
/// input order.
class EmbeddingSource {
 public:
  virtual ~EmbeddingSource() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
};

struct InferenceRequest {
  std::string image_id;
  std::string prompt_id;
  int max_new_tokens = 384;
  double repetition_penalty = 1.2;
};

/// Produces a damage description for one image reference.
class InferenceBackend {
 public:
  virtual ~InferenceBackend() = default;
  virtual std::string generate(const InferenceRequest& request) = 0;
};

struct BackendConfig {
  enum class Kind { mock, http };
  Kind kind = Kind::mock;
  std::optional<std::string> endpoint;
  double timeout_s = 30.0;
  // Total attempts including the first one; 3 means "two retries".
  int max_retries = 3;
  int max_in_flight = 8;

  bool operator==(const BackendConfig&) const = default;
};

std::vector<std::string> validate_backend_config(const BackendConfig& cfg);

enum class BackendErrorKind { timeout, status, schema };

/// Failure talking to an external service, tagged with what went wrong and
/// which request it was.
class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrorKind kind, std::string request_id, const std::string& message)
      : std::runtime_error(message), kind_(kind), request_id_(std::move(request_id)) {}

  BackendErrorKind kind() const { return kind_; }
  const std::string& request_id() const { return request_id_; }

 private:
  BackendErrorKind kind_;
  std::string request_id_;
};

}  // namespace bridgescore
