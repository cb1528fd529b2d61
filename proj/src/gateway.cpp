#include "foveate/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "foveate/log.hpp"

namespace foveate {

using nlohmann::json;

SamplingProfile named_profile(std::string_view name) {
  SamplingProfile p;
  if (name == "normal") {
    p.temperature = 0.5;
    p.top_p = 1.0;
    p.frequency_penalty = 0.5;
    p.presence_penalty = 0.0;
    p.max_completion_tokens = std::nullopt;
  } else if (name == "high-creativity") {
    p.temperature = 1.2;
    p.top_p = 1.0;
    p.frequency_penalty = 0.5;
    p.presence_penalty = 0.0;
    p.max_completion_tokens = std::nullopt;
  } else if (name == "difficulty-judge") {
    p.temperature = 0.5;
    p.top_p = 1.0;
    p.frequency_penalty = 0.0;
    p.presence_penalty = 0.0;
    p.max_completion_tokens = 5;
  } else if (name == "regeneration-judge") {
    p.temperature = 0.2;
    p.top_p = 1.0;
    p.frequency_penalty = 0.0;
    p.presence_penalty = 0.0;
    p.max_completion_tokens = 50;
  } else {
    throw ConfigError("unknown sampling profile: " + std::string(name));
  }
  return p;
}

const std::vector<std::string>& profile_names() {
  static const std::vector<std::string> kNames = {
      "normal", "high-creativity", "difficulty-judge", "regeneration-judge"};
  return kNames;
}

double EmbeddingVector::norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error("cosine: dimension mismatch (" + std::to_string(a.dim()) +
                " vs " + std::to_string(b.dim()) + ")");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
  double na = a.norm();
  double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error("cosine: zero-norm vector");
  return dot / (na * nb);
}

// RAII guard for the in-flight bound.
class Gateway::Slot {
 public:
  explicit Slot(Gateway& gw) : gw_(gw) {
    std::unique_lock<std::mutex> lock(gw_.mu_);
    gw_.cv_.wait(lock, [&] { return gw_.in_flight_ < gw_.options_.max_in_flight; });
    ++gw_.in_flight_;
  }
  ~Slot() {
    {
      std::lock_guard<std::mutex> lock(gw_.mu_);
      --gw_.in_flight_;
    }
    gw_.cv_.notify_one();
  }

 private:
  Gateway& gw_;
};

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(std::move(options)) {
  if (!backend_) throw ConfigError("gateway requires a backend");
  if (options_.max_in_flight < 1) options_.max_in_flight = 1;
  if (options_.embed_batch_limit == 0) options_.embed_batch_limit = 1;
  if (!options_.sleep_fn) {
    options_.sleep_fn = [](std::chrono::milliseconds d) {
      std::this_thread::sleep_for(d);
    };
  }
}

template <typename Fn>
auto Gateway::with_retries(Fn&& attempt, int& retries_out) -> decltype(attempt()) {
  int retries = 0;
  for (;;) {
    try {
      auto result = attempt();
      retries_out = retries;
      return result;
    } catch (const TransportError& e) {
      if (retries >= options_.max_retries) throw;
      auto delay = options_.backoff.empty()
                       ? std::chrono::milliseconds(1000)
                       : options_.backoff[std::min<std::size_t>(
                             static_cast<std::size_t>(retries),
                             options_.backoff.size() - 1)];
      log::warn(std::string("transient backend failure, retrying: ") + e.what());
      options_.sleep_fn(delay);
      ++retries;
    }
  }
}

ChatExchange Gateway::chat(const std::string& system, const std::string& user,
                           const SamplingProfile& profile) {
  if (system.empty() || user.empty()) throw Error("chat: empty prompt");
  Slot slot(*this);
  ChatRequest request{system, user, profile};
  int retries = 0;
  ChatReply reply =
      with_retries([&] { return backend_->chat_once(request); }, retries);
  ChatExchange exchange;
  exchange.system = system;
  exchange.user = user;
  exchange.profile = profile;
  exchange.response_text = reply.text;
  exchange.usage = reply.usage;
  exchange.usage.retries = retries;
  exchange.backend_id = backend_->id();
  return exchange;
}

std::vector<EmbeddingVector> Gateway::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) throw Error("embed: empty input batch");
  Slot slot(*this);
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t begin = 0; begin < texts.size();
       begin += options_.embed_batch_limit) {
    std::size_t end = std::min(texts.size(), begin + options_.embed_batch_limit);
    std::vector<std::string> chunk(texts.begin() + static_cast<std::ptrdiff_t>(begin),
                                   texts.begin() + static_cast<std::ptrdiff_t>(end));
    int retries = 0;
    std::vector<EmbeddingVector> vectors =
        with_retries([&] { return backend_->embed_once(chunk); }, retries);
    if (vectors.size() != chunk.size()) {
      throw BadResponseError("embed: backend returned " +
                             std::to_string(vectors.size()) + " vectors for " +
                             std::to_string(chunk.size()) + " inputs");
    }
    for (auto& v : vectors) {
      if (v.values.empty() || v.norm() == 0.0) {
        throw BadResponseError("embed: zero-norm embedding returned");
      }
      std::lock_guard<std::mutex> lock(mu_);
      if (expected_dim_ == 0) {
        expected_dim_ = v.dim();
      } else if (v.dim() != expected_dim_) {
        throw BadResponseError("embed: dimension mismatch across run (" +
                               std::to_string(v.dim()) + " vs " +
                               std::to_string(expected_dim_) + ")");
      }
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::string chat_request_body(const std::string& model, const ChatRequest& request) {
  json body{
      {"model", model},
      {"messages",
       json::array({json{{"role", "system"}, {"content", request.system}},
                    json{{"role", "user"}, {"content", request.user}}})},
      {"temperature", request.profile.temperature},
      {"top_p", request.profile.top_p},
      {"frequency_penalty", request.profile.frequency_penalty},
      {"presence_penalty", request.profile.presence_penalty},
  };
  if (request.profile.max_completion_tokens) {
    body["max_completion_tokens"] = *request.profile.max_completion_tokens;
  }
  return body.dump();
}

std::string embeddings_request_body(const std::string& model,
                                    const std::vector<std::string>& texts) {
  json body{{"model", model}, {"input", texts}};
  return body.dump();
}

}  // namespace foveate
