#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "aloe/gateway/backend.hpp"

namespace aloe::gateway {

// "http://host:8080/v1" -> origin "http://host:8080", path prefix "/v1".
struct BaseUrl {
  std::string origin;
  std::string path_prefix;

  static BaseUrl parse(const std::string& url);
};

// Request body for POST {base_url}/chat/completions.
nlohmann::json chat_request_body(const ChatRequest& request);

// choices[0].message.content; throws TransientFailure when absent.
std::string parse_chat_response(const std::string& body);

// data[i].embedding, reordered by data[i].index when present.
std::vector<std::vector<double>> parse_embedding_response(const std::string& body, std::size_t expected);

// OpenAI-compatible chat completions over HTTP(S). Each request passes
// through the shared rate limiter; the bearer token is read from the
// environment variable named by api_key_env at send time.
class HttpChatBackend final : public ChatBackend {
 public:
  HttpChatBackend(ProviderConfig config, std::shared_ptr<RateLimiter> limiter);

  std::string send(const ChatRequest& request) override;

 private:
  ProviderConfig config_;
  BaseUrl url_;
  std::shared_ptr<RateLimiter> limiter_;
};

class HttpEmbeddingBackend final : public EmbeddingBackend {
 public:
  HttpEmbeddingBackend(ProviderConfig config, std::shared_ptr<RateLimiter> limiter);

  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

 private:
  ProviderConfig config_;
  BaseUrl url_;
  std::shared_ptr<RateLimiter> limiter_;
};

}  // namespace aloe::gateway
