#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aloe/common/random.hpp"
#include "aloe/gateway/clock.hpp"
#include "aloe/gateway/rate_limiter.hpp"
#include "aloe/gateway/templates.hpp"
#include "aloe/gateway/types.hpp"

namespace aloe::gateway {

struct ChatRequest {
  // Absent for requests to an evaluated model, which has no pipeline role.
  std::optional<RoleId> role;
  // Template inputs. Used by the mock backend only; never sent over the wire.
  Bindings bindings;
  History messages;
  std::string model;
  Sampling sampling;
  // Caller-supplied salt folded into mock output. Not sent over the wire.
  std::uint64_t salt = 0;
};

// Retryable failure: connection errors, 429, 5xx, malformed bodies, blank
// completions. Anything else is thrown as aloe::Error and is not retried.
class TransientFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string send(const ChatRequest& request) = 0;
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  // One raw (not necessarily normalized) vector per input, same order.
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
};

// Retry loop with jittered exponential backoff around a backend.
class ChatEndpoint {
 public:
  ChatEndpoint(std::shared_ptr<ChatBackend> backend, ProviderConfig config, std::shared_ptr<Clock> clock,
               BackoffPolicy backoff = {});

  // Non-blank completion text. Throws ProviderExhausted when retries run out
  // on transport failures, EmptyCompletion when they run out on blank text.
  std::string complete(const ChatRequest& request) const;

  const ProviderConfig& config() const noexcept { return config_; }

 private:
  std::shared_ptr<ChatBackend> backend_;
  ProviderConfig config_;
  std::shared_ptr<Clock> clock_;
  BackoffPolicy backoff_;
  mutable std::mutex rng_mutex_;
  mutable Rng jitter_;
};

class EmbeddingEndpoint {
 public:
  EmbeddingEndpoint(std::shared_ptr<EmbeddingBackend> backend, ProviderConfig config, std::shared_ptr<Clock> clock,
                    BackoffPolicy backoff = {});

  // Unit-normalized vectors of uniform dimension, input order preserved.
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const;

  const ProviderConfig& config() const noexcept { return config_; }

 private:
  std::shared_ptr<EmbeddingBackend> backend_;
  ProviderConfig config_;
  std::shared_ptr<Clock> clock_;
  BackoffPolicy backoff_;
  mutable std::mutex rng_mutex_;
  mutable Rng jitter_;
};

}  // namespace aloe::gateway
