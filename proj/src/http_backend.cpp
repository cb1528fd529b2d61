#include "foveate/http_backend.hpp"

#include <algorithm>

#include <httplib.h>
#include <json.hpp>

namespace foveate {

using nlohmann::json;

namespace {

struct SplitUrl {
  std::string origin;       // scheme://host[:port]
  std::string path_prefix;  // e.g. /v1, no trailing slash
};

SplitUrl split_base_url(const std::string& base_url) {
  auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("base_url must include a scheme: " + base_url);
  }
  auto path_start = base_url.find('/', scheme_end + 3);
  SplitUrl split;
  if (path_start == std::string::npos) {
    split.origin = base_url;
  } else {
    split.origin = base_url.substr(0, path_start);
    split.path_prefix = base_url.substr(path_start);
  }
  while (!split.path_prefix.empty() && split.path_prefix.back() == '/') {
    split.path_prefix.pop_back();
  }
  return split;
}

[[noreturn]] void raise_for_status(int status, const std::string& body) {
  std::string snippet = body.substr(0, 200);
  if (status == 401 || status == 403) {
    throw AuthError("authentication failed (HTTP " + std::to_string(status) +
                    "): " + snippet);
  }
  if (status == 408 || status == 429 || status >= 500) {
    throw TransportError("HTTP " + std::to_string(status) + ": " + snippet);
  }
  throw BadResponseError("HTTP " + std::to_string(status) + ": " + snippet);
}

TokenUsage parse_usage(const json& payload) {
  TokenUsage usage;
  if (payload.contains("usage") && payload.at("usage").is_object()) {
    const auto& u = payload.at("usage");
    usage.prompt_tokens = u.value("prompt_tokens", 0L);
    usage.completion_tokens = u.value("completion_tokens", 0L);
    usage.total_tokens = u.value("total_tokens", 0L);
  }
  return usage;
}

}  // namespace

struct HttpBackend::Impl {
  HttpBackendConfig config;
  SplitUrl url;
  httplib::Client client;

  explicit Impl(HttpBackendConfig cfg)
      : config(std::move(cfg)), url(split_base_url(config.base_url)),
        client(url.origin) {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (url.origin.rfind("https", 0) == 0) {
      throw ConfigError("built without TLS support; use an http:// base_url");
    }
#endif
    client.set_connection_timeout(config.timeout_seconds, 0);
    client.set_read_timeout(config.timeout_seconds, 0);
    client.set_write_timeout(config.timeout_seconds, 0);
  }

  json post(const std::string& endpoint, const std::string& body) {
    httplib::Headers headers;
    if (!config.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config.api_key);
    }
    auto res = client.Post(url.path_prefix + endpoint, headers, body,
                           "application/json");
    if (!res) {
      throw TransportError("request to " + endpoint +
                           " failed: " + httplib::to_string(res.error()));
    }
    if (res->status >= 400) raise_for_status(res->status, res->body);
    json payload = json::parse(res->body, nullptr, false);
    if (payload.is_discarded()) {
      throw BadResponseError("response from " + endpoint + " is not JSON");
    }
    return payload;
  }
};

HttpBackend::HttpBackend(HttpBackendConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::id() const {
  return "openai:" + impl_->config.chat_model;
}

ChatReply HttpBackend::chat_once(const ChatRequest& request) {
  json payload = impl_->post(
      "/chat/completions", chat_request_body(impl_->config.chat_model, request));
  if (!payload.contains("choices") || !payload.at("choices").is_array() ||
      payload.at("choices").empty()) {
    throw BadResponseError("chat response has no choices");
  }
  const auto& message = payload.at("choices").at(0).value("message", json::object());
  if (!message.contains("content") || !message.at("content").is_string()) {
    throw BadResponseError("chat response missing text");
  }
  ChatReply reply;
  reply.text = message.at("content").get<std::string>();
  reply.usage = parse_usage(payload);
  return reply;
}

std::vector<EmbeddingVector> HttpBackend::embed_once(
    const std::vector<std::string>& texts) {
  json payload = impl_->post(
      "/embeddings", embeddings_request_body(impl_->config.embed_model, texts));
  if (!payload.contains("data") || !payload.at("data").is_array()) {
    throw BadResponseError("embeddings response missing data");
  }
  struct Indexed {
    int index;
    EmbeddingVector vector;
  };
  std::vector<Indexed> rows;
  rows.reserve(payload.at("data").size());
  for (const auto& item : payload.at("data")) {
    if (!item.contains("embedding") || !item.at("embedding").is_array()) {
      throw BadResponseError("embeddings response row missing values");
    }
    Indexed row;
    row.index = item.value("index", static_cast<int>(rows.size()));
    row.vector.values = item.at("embedding").get<std::vector<double>>();
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(),
            [](const Indexed& a, const Indexed& b) { return a.index < b.index; });
  std::vector<EmbeddingVector> out;
  out.reserve(rows.size());
  for (auto& row : rows) out.push_back(std::move(row.vector));
  return out;
}

}  // namespace foveate
