#include "aloe/gateway/gateway.hpp"

#include "aloe/common/error.hpp"
#include "aloe/gateway/http_backend.hpp"
#include "aloe/gateway/mock_backend.hpp"

namespace aloe::gateway {

History build_messages(const RoleTemplate& tmpl, const Bindings& bindings, const History& history) {
  std::string prompt = tmpl.render(bindings);
  History out;
  out.reserve(history.size() + 1);
  if (tmpl.placement == Placement::System) {
    out.push_back(ChatMessage::system(std::move(prompt)));
    out.insert(out.end(), history.begin(), history.end());
  } else {
    out.insert(out.end(), history.begin(), history.end());
    out.push_back(ChatMessage::user(std::move(prompt)));
  }
  return out;
}

Gateway::Gateway(TemplateRegistry templates, std::map<RoleId, std::shared_ptr<const ChatEndpoint>> routes,
                 std::shared_ptr<const EmbeddingEndpoint> embedder)
    : templates_(std::move(templates)), routes_(std::move(routes)), embedder_(std::move(embedder)) {
  for (RoleId r : kAllRoles) {
    if (!routes_.count(r) || !routes_.at(r))
      throw Error(ErrorCode::ConfigError, "no provider configured for role " + std::string(to_string(r)));
    templates_.get(r);
  }
  if (!embedder_) throw Error(ErrorCode::ConfigError, "no embedding provider configured");
}

Gateway Gateway::mock(std::uint64_t seed) {
  EndpointFactory factory(seed, std::make_shared<SystemClock>());
  ProviderConfig cfg;
  cfg.backend = BackendKind::Mock;
  cfg.model_name = "mock";
  std::map<RoleId, ProviderConfig> roles;
  for (RoleId r : kAllRoles) roles[r] = cfg;
  return factory.gateway(roles, cfg);
}

std::string Gateway::complete(RoleId role, const Bindings& bindings, const History& history,
                              std::uint64_t salt) const {
  return complete_with(templates_.get(role), bindings, history, salt);
}

std::string Gateway::complete_with(const RoleTemplate& tmpl, const Bindings& bindings, const History& history,
                                   std::uint64_t salt) const {
  return send(tmpl, bindings, build_messages(tmpl, bindings, history), salt);
}

std::string Gateway::complete_reask(RoleId role, const Bindings& bindings, const History& history,
                                    const std::string& failed_reply, std::string_view reask,
                                    std::uint64_t salt) const {
  const RoleTemplate& tmpl = templates_.get(role);
  History messages = build_messages(tmpl, bindings, history);
  messages.push_back(ChatMessage::assistant(failed_reply));
  messages.push_back(ChatMessage::user(std::string(reask)));
  return send(tmpl, bindings, std::move(messages), salt);
}

std::string Gateway::send(const RoleTemplate& tmpl, const Bindings& bindings, History messages,
                          std::uint64_t salt) const {
  const ChatEndpoint& endpoint = route(tmpl.role_id);
  ChatRequest request;
  request.role = tmpl.role_id;
  request.bindings = bindings;
  request.messages = std::move(messages);
  request.model = endpoint.config().model_name;
  request.sampling = tmpl.sampling;
  request.salt = salt;
  return endpoint.complete(request);
}

std::vector<EmbeddingVector> Gateway::embed(const std::vector<std::string>& texts) const {
  return embedder_->embed(texts);
}

const ChatEndpoint& Gateway::route(RoleId role) const {
  auto it = routes_.find(role);
  if (it == routes_.end())
    throw Error(ErrorCode::ConfigError, "no provider configured for role " + std::string(to_string(role)));
  return *it->second;
}

EndpointFactory::EndpointFactory(std::uint64_t mock_seed, std::shared_ptr<Clock> clock)
    : seed_(mock_seed), clock_(std::move(clock)) {}

std::shared_ptr<RateLimiter> EndpointFactory::limiter_for(const ProviderConfig& config) {
  const std::string key = config.base_url + "\n" + config.model_name;
  auto& slot = limiters_[key];
  if (!slot) slot = std::make_shared<RateLimiter>(config.requests_per_minute, *clock_);
  return slot;
}

std::shared_ptr<const ChatEndpoint> EndpointFactory::chat(const ProviderConfig& config) {
  config.validate();
  std::shared_ptr<ChatBackend> backend;
  if (config.backend == BackendKind::Mock) {
    backend = std::make_shared<MockChatBackend>(seed_);
  } else {
    backend = std::make_shared<HttpChatBackend>(config, limiter_for(config));
  }
  return std::make_shared<const ChatEndpoint>(std::move(backend), config, clock_);
}

std::shared_ptr<const EmbeddingEndpoint> EndpointFactory::embedding(const ProviderConfig& config) {
  config.validate();
  std::shared_ptr<EmbeddingBackend> backend;
  if (config.backend == BackendKind::Mock) {
    backend = std::make_shared<MockEmbeddingBackend>();
  } else {
    backend = std::make_shared<HttpEmbeddingBackend>(config, limiter_for(config));
  }
  return std::make_shared<const EmbeddingEndpoint>(std::move(backend), config, clock_);
}

Gateway EndpointFactory::gateway(const std::map<RoleId, ProviderConfig>& roles, const ProviderConfig& embedder,
                                 TemplateRegistry templates) {
  std::map<RoleId, std::shared_ptr<const ChatEndpoint>> routes;
  for (const auto& [role, cfg] : roles) routes[role] = chat(cfg);
  return Gateway(std::move(templates), std::move(routes), embedding(embedder));
}

}  // namespace aloe::gateway
