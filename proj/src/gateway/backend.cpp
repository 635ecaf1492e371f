#include "aloe/gateway/backend.hpp"

#include <spdlog/spdlog.h>

#include "aloe/common/error.hpp"
#include "aloe/common/text.hpp"

namespace aloe::gateway {

namespace {
constexpr std::uint64_t kJitterSeed = 0x6a09e667f3bcc909ULL;
}

ChatEndpoint::ChatEndpoint(std::shared_ptr<ChatBackend> backend, ProviderConfig config, std::shared_ptr<Clock> clock,
                           BackoffPolicy backoff)
    : backend_(std::move(backend)),
      config_(std::move(config)),
      clock_(std::move(clock)),
      backoff_(backoff),
      jitter_(kJitterSeed) {
  config_.validate();
  if (!backend_ || !clock_) throw Error(ErrorCode::InvalidArgument, "chat endpoint needs a backend and a clock");
}

std::string ChatEndpoint::complete(const ChatRequest& request) const {
  bool last_was_blank = false;
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    try {
      std::string text = backend_->send(request);
      if (!trim(text).empty()) return text;
      last_was_blank = true;
      last_error = "blank completion";
    } catch (const TransientFailure& e) {
      last_was_blank = false;
      last_error = e.what();
    }
    if (attempt < config_.max_retries) {
      Duration wait;
      {
        std::lock_guard lock(rng_mutex_);
        wait = backoff_.delay(attempt, jitter_);
      }
      spdlog::debug("retrying {} after {}: attempt {}", config_.model_name, last_error, attempt + 1);
      clock_->sleep_for(wait);
    }
  }
  const std::string what = "model " + config_.model_name + " after " + std::to_string(config_.max_retries + 1) +
                           " attempts: " + last_error;
  if (last_was_blank) throw Error(ErrorCode::EmptyCompletion, what);
  throw Error(ErrorCode::ProviderExhausted, what);
}

EmbeddingEndpoint::EmbeddingEndpoint(std::shared_ptr<EmbeddingBackend> backend, ProviderConfig config,
                                     std::shared_ptr<Clock> clock, BackoffPolicy backoff)
    : backend_(std::move(backend)),
      config_(std::move(config)),
      clock_(std::move(clock)),
      backoff_(backoff),
      jitter_(kJitterSeed) {
  config_.validate();
  if (!backend_ || !clock_) throw Error(ErrorCode::InvalidArgument, "embedding endpoint needs a backend and a clock");
}

std::vector<EmbeddingVector> EmbeddingEndpoint::embed(const std::vector<std::string>& texts) const {
  if (texts.empty()) throw Error(ErrorCode::InvalidArgument, "embed needs at least one text");
  for (const auto& t : texts) {
    if (t.empty()) throw Error(ErrorCode::InvalidArgument, "embed inputs must be non-empty");
  }
  std::vector<std::vector<double>> raw;
  std::string last_error;
  bool ok = false;
  for (int attempt = 0; attempt <= config_.max_retries && !ok; ++attempt) {
    try {
      raw = backend_->embed(texts);
      ok = true;
    } catch (const TransientFailure& e) {
      last_error = e.what();
      if (attempt < config_.max_retries) {
        Duration wait;
        {
          std::lock_guard lock(rng_mutex_);
          wait = backoff_.delay(attempt, jitter_);
        }
        clock_->sleep_for(wait);
      }
    }
  }
  if (!ok)
    throw Error(ErrorCode::ProviderExhausted, "embedding model " + config_.model_name + ": " + last_error);
  if (raw.size() != texts.size())
    throw Error(ErrorCode::ProviderExhausted, "embedding provider returned " + std::to_string(raw.size()) +
                                                  " vectors for " + std::to_string(texts.size()) + " inputs");
  std::vector<EmbeddingVector> out;
  out.reserve(raw.size());
  for (auto& v : raw) {
    if (!out.empty() && v.size() != out.front().dimension())
      throw Error(ErrorCode::DimensionMismatch, "embedding dimensions " + std::to_string(out.front().dimension()) +
                                                    " and " + std::to_string(v.size()) + " in one response");
    out.push_back(EmbeddingVector::normalized(std::move(v)));
  }
  return out;
}

}  // namespace aloe::gateway
