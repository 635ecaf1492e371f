#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "aloe/gateway/backend.hpp"
#include "aloe/gateway/clock.hpp"
#include "aloe/gateway/templates.hpp"
#include "aloe/gateway/types.hpp"

namespace aloe::gateway {

// Outgoing message list for a template: see Placement.
History build_messages(const RoleTemplate& tmpl, const Bindings& bindings, const History& history);

// Routes each role to its endpoint and renders its prompt. Thread-safe:
// the only shared mutable state lives in the endpoints' rate limiters.
class Gateway {
 public:
  Gateway(TemplateRegistry templates, std::map<RoleId, std::shared_ptr<const ChatEndpoint>> routes,
          std::shared_ptr<const EmbeddingEndpoint> embedder);

  // Every role and the embedder on the offline mock backends.
  static Gateway mock(std::uint64_t seed);

  std::string complete(RoleId role, const Bindings& bindings, const History& history,
                       std::uint64_t salt = 0) const;

  // Same as complete() but with an explicit template, e.g. the personality
  // variant of persona generation.
  std::string complete_with(const RoleTemplate& tmpl, const Bindings& bindings, const History& history,
                            std::uint64_t salt = 0) const;

  // Re-asks after an unusable reply: the original request followed by
  // [assistant: failed_reply, user: reask].
  std::string complete_reask(RoleId role, const Bindings& bindings, const History& history,
                             const std::string& failed_reply, std::string_view reask, std::uint64_t salt = 0) const;

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const;

  const TemplateRegistry& templates() const noexcept { return templates_; }
  const ChatEndpoint& route(RoleId role) const;

 private:
  std::string send(const RoleTemplate& tmpl, const Bindings& bindings, History messages, std::uint64_t salt) const;

  TemplateRegistry templates_;
  std::map<RoleId, std::shared_ptr<const ChatEndpoint>> routes_;
  std::shared_ptr<const EmbeddingEndpoint> embedder_;
};

// Builds http or mock endpoints from provider configs. Providers that share
// (base_url, model_name) share one rate limiter.
class EndpointFactory {
 public:
  EndpointFactory(std::uint64_t mock_seed, std::shared_ptr<Clock> clock);

  std::shared_ptr<const ChatEndpoint> chat(const ProviderConfig& config);
  std::shared_ptr<const EmbeddingEndpoint> embedding(const ProviderConfig& config);

  Gateway gateway(const std::map<RoleId, ProviderConfig>& roles, const ProviderConfig& embedder,
                  TemplateRegistry templates = TemplateRegistry::defaults());

 private:
  std::shared_ptr<RateLimiter> limiter_for(const ProviderConfig& config);

  std::uint64_t seed_;
  std::shared_ptr<Clock> clock_;
  std::map<std::string, std::shared_ptr<RateLimiter>> limiters_;
};

}  // namespace aloe::gateway
