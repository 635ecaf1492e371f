#include "aloe/gateway/types.hpp"

#include <cmath>

#include "aloe/common/error.hpp"

namespace aloe::gateway {

std::string_view to_string(MessageRole role) {
  switch (role) {
    case MessageRole::System: return "system";
    case MessageRole::User: return "user";
    case MessageRole::Assistant: return "assistant";
  }
  return "user";
}

MessageRole parse_message_role(std::string_view text) {
  if (text == "system") return MessageRole::System;
  if (text == "user") return MessageRole::User;
  if (text == "assistant") return MessageRole::Assistant;
  throw Error(ErrorCode::InvalidArgument, "unknown message role '" + std::string(text) + "'");
}

ChatMessage::ChatMessage(MessageRole role, std::string content) : role_(role), content_(std::move(content)) {
  if (content_.empty()) throw Error(ErrorCode::InvalidArgument, "chat message content must be non-empty");
}

std::string_view to_string(RoleId role) {
  switch (role) {
    case RoleId::RolePlay: return "role_play";
    case RoleId::Induction: return "induction";
    case RoleId::Preferred: return "preferred";
    case RoleId::Rejected: return "rejected";
    case RoleId::Judge: return "judge";
    case RoleId::PersonaGen: return "persona_gen";
  }
  return "role_play";
}

RoleId parse_role_id(std::string_view text) {
  for (RoleId r : kAllRoles) {
    if (to_string(r) == text) return r;
  }
  throw Error(ErrorCode::ConfigError, "unknown role id '" + std::string(text) + "'");
}

std::string_view to_string(BackendKind kind) { return kind == BackendKind::Http ? "http" : "mock"; }

BackendKind parse_backend_kind(std::string_view text) {
  if (text == "http") return BackendKind::Http;
  if (text == "mock") return BackendKind::Mock;
  throw Error(ErrorCode::ConfigError, "backend must be 'http' or 'mock', got '" + std::string(text) + "'");
}

void ProviderConfig::validate() const {
  if (max_retries < 0 || max_retries > 8)
    throw Error(ErrorCode::ConfigError, "max_retries must be in [0, 8], got " + std::to_string(max_retries));
  if (requests_per_minute <= 0)
    throw Error(ErrorCode::ConfigError, "requests_per_minute must be positive");
  if (backend == BackendKind::Http && base_url.empty())
    throw Error(ErrorCode::ConfigError, "http provider needs a base_url");
}

EmbeddingVector EmbeddingVector::normalized(std::vector<double> raw) {
  if (raw.empty()) throw Error(ErrorCode::InvalidArgument, "embedding must have positive dimension");
  double sq = 0.0;
  for (double v : raw) sq += v * v;
  const double n = std::sqrt(sq);
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorCode::InvalidArgument, "embedding has zero or non-finite norm");
  for (double& v : raw) v /= n;
  return EmbeddingVector(std::move(raw));
}

EmbeddingVector EmbeddingVector::unit(std::vector<double> values) {
  EmbeddingVector v(std::move(values));
  if (v.values_.empty() || std::abs(v.norm() - 1.0) > 1e-6)
    throw Error(ErrorCode::InvalidArgument, "embedding is not unit-normalized");
  return v;
}

double EmbeddingVector::norm() const {
  double sq = 0.0;
  for (double v : values_) sq += v * v;
  return std::sqrt(sq);
}

EmbeddingVector EmbeddingVector::operator-() const {
  std::vector<double> neg(values_);
  for (double& v : neg) v = -v;
  return EmbeddingVector(std::move(neg));
}

}  // namespace aloe::gateway
