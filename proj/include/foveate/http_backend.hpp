#pragma once

#include <memory>
#include <string>

#include "foveate/gateway.hpp"

namespace foveate {

struct HttpBackendConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string chat_model = "gpt-4o-mini";
  std::string embed_model = "text-embedding-3-small";
  std::string api_key;
  long timeout_seconds = 120;
};

// OpenAI-compatible chat-completions and embeddings client. One attempt per
// call; the gateway layers retries on top. Connection failures, 408/429 and
// 5xx raise TransportError; 401/403 raise AuthError; anything else wrong
// with the reply raises BadResponseError.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  std::string id() const override;
  ChatReply chat_once(const ChatRequest& request) override;
  std::vector<EmbeddingVector> embed_once(
      const std::vector<std::string>& texts) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace foveate
