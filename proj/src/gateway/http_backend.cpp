#include "aloe/gateway/http_backend.hpp"

#include <cstdlib>

#include <httplib.h>

#include "aloe/common/error.hpp"

namespace aloe::gateway {

namespace {

using json = nlohmann::json;

httplib::Headers auth_headers(const ProviderConfig& config) {
  httplib::Headers headers;
  if (!config.api_key_env.empty()) {
    if (const char* key = std::getenv(config.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  return headers;
}

std::string post_json(const BaseUrl& url, const std::string& path, const json& body, const ProviderConfig& config) {
  httplib::Client client(url.origin);
  client.set_connection_timeout(10);
  client.set_read_timeout(120);
  client.set_write_timeout(30);
  auto res = client.Post(url.path_prefix + path, auth_headers(config), body.dump(), "application/json");
  if (!res) throw TransientFailure("request to " + url.origin + " failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500)
    throw TransientFailure("http " + std::to_string(res->status) + " from " + url.origin);
  if (res->status != 200)
    throw Error(ErrorCode::ProviderExhausted,
                "http " + std::to_string(res->status) + " from " + url.origin + ": " + res->body.substr(0, 200));
  return res->body;
}

}  // namespace

BaseUrl BaseUrl::parse(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::ConfigError, "base_url needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  BaseUrl out;
  if (path_start == std::string::npos) {
    out.origin = url;
  } else {
    out.origin = url.substr(0, path_start);
    out.path_prefix = url.substr(path_start);
  }
  while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
  return out;
}

json chat_request_body(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role())}, {"content", m.content()}});
  }
  return {{"model", request.model},
          {"messages", std::move(messages)},
          {"temperature", request.sampling.temperature},
          {"max_tokens", request.sampling.max_tokens}};
}

std::string parse_chat_response(const std::string& body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw TransientFailure("malformed chat response body");
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const json::exception& e) {
    throw TransientFailure(std::string("chat response missing choices[0].message.content: ") + e.what());
  }
}

std::vector<std::vector<double>> parse_embedding_response(const std::string& body, std::size_t expected) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw TransientFailure("malformed embedding response body");
  try {
    const auto& data = doc.at("data");
    std::vector<std::vector<double>> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      const std::size_t slot = data[i].contains("index") ? data[i]["index"].get<std::size_t>() : i;
      if (slot >= out.size()) throw TransientFailure("embedding index out of range");
      out[slot] = data[i].at("embedding").get<std::vector<double>>();
    }
    if (out.size() != expected)
      throw Error(ErrorCode::ProviderExhausted, "embedding response has " + std::to_string(out.size()) +
                                                    " entries, expected " + std::to_string(expected));
    return out;
  } catch (const json::exception& e) {
    throw TransientFailure(std::string("embedding response malformed: ") + e.what());
  }
}

HttpChatBackend::HttpChatBackend(ProviderConfig config, std::shared_ptr<RateLimiter> limiter)
    : config_(std::move(config)), url_(BaseUrl::parse(config_.base_url)), limiter_(std::move(limiter)) {}

std::string HttpChatBackend::send(const ChatRequest& request) {
  limiter_->acquire();
  ChatRequest wire = request;
  if (wire.model.empty()) wire.model = config_.model_name;
  return parse_chat_response(post_json(url_, "/chat/completions", chat_request_body(wire), config_));
}

HttpEmbeddingBackend::HttpEmbeddingBackend(ProviderConfig config, std::shared_ptr<RateLimiter> limiter)
    : config_(std::move(config)), url_(BaseUrl::parse(config_.base_url)), limiter_(std::move(limiter)) {}

std::vector<std::vector<double>> HttpEmbeddingBackend::embed(const std::vector<std::string>& texts) {
  limiter_->acquire();
  json body = {{"model", config_.model_name}, {"input", texts}};
  return parse_embedding_response(post_json(url_, "/embeddings", body, config_), texts.size());
}

}  // namespace aloe::gateway
