#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "foveate/errors.hpp"

namespace foveate {

// Sampling hyperparameter bundle sent verbatim with every chat call.
struct SamplingProfile {
  double temperature = 0.5;
  double top_p = 1.0;
  double frequency_penalty = 0.0;
  double presence_penalty = 0.0;
  std::optional<int> max_completion_tokens;

  bool operator==(const SamplingProfile&) const = default;
};

// Named presets. "normal" drives foveation and synthesis, "high-creativity"
// drives re-synthesis, the two judge presets drive the evaluation prompts.
// Throws ConfigError on an unknown name.
SamplingProfile named_profile(std::string_view name);
const std::vector<std::string>& profile_names();

struct TokenUsage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
  long total_tokens = 0;
  int retries = 0;
};

struct ChatExchange {
  std::string system;
  std::string user;
  SamplingProfile profile;
  std::string response_text;  // verbatim, untrimmed
  TokenUsage usage;
  std::string backend_id;
};

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  double norm() const;

  bool operator==(const EmbeddingVector&) const = default;
};

// Throws on dimension mismatch or a zero-norm operand.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

struct ChatRequest {
  std::string system;
  std::string user;
  SamplingProfile profile;
};

struct ChatReply {
  std::string text;
  TokenUsage usage;
};

// Single attempt against one provider. Retries, backoff and the in-flight
// bound live in Gateway so every backend gets the same policy.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  virtual ChatReply chat_once(const ChatRequest& request) = 0;
  virtual std::vector<EmbeddingVector> embed_once(
      const std::vector<std::string>& texts) = 0;
};

struct GatewayOptions {
  int max_retries = 3;  // transport retries per call, on top of the first try
  std::vector<std::chrono::milliseconds> backoff = {
      std::chrono::milliseconds(1000), std::chrono::milliseconds(2000),
      std::chrono::milliseconds(4000)};
  int max_in_flight = 4;
  std::size_t embed_batch_limit = 32;  // provider batch-size cap
  // Overridable so tests never sleep for real.
  std::function<void(std::chrono::milliseconds)> sleep_fn;
};

class Gateway {
 public:
  explicit Gateway(std::shared_ptr<Backend> backend, GatewayOptions options = {});

  // Retries TransportError up to max_retries with the configured backoff.
  // AuthError and BadResponseError propagate immediately: a well-formed but
  // unusable response is never retried.
  ChatExchange chat(const std::string& system, const std::string& user,
                    const SamplingProfile& profile);

  // One vector per input, input order, uniform dimension across the run.
  // Batches larger than embed_batch_limit are split transparently.
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts);

  Backend& backend() { return *backend_; }
  const GatewayOptions& options() const { return options_; }

 private:
  class Slot;

  template <typename Fn>
  auto with_retries(Fn&& attempt, int& retries_out) -> decltype(attempt());

  std::shared_ptr<Backend> backend_;
  GatewayOptions options_;

  std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  std::size_t expected_dim_ = 0;  // 0 until the first embedding arrives
};

// OpenAI-compatible request bodies, exposed so wire fixtures can check the
// exact serialization of each sampling profile.
std::string chat_request_body(const std::string& model, const ChatRequest& request);
std::string embeddings_request_body(const std::string& model,
                                    const std::vector<std::string>& texts);

}  // namespace foveate
