#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aloe::gateway {

enum class MessageRole { System, User, Assistant };

std::string_view to_string(MessageRole role);
MessageRole parse_message_role(std::string_view text);

class ChatMessage {
 public:
  // Throws InvalidArgument on empty content.
  ChatMessage(MessageRole role, std::string content);

  static ChatMessage system(std::string content) { return {MessageRole::System, std::move(content)}; }
  static ChatMessage user(std::string content) { return {MessageRole::User, std::move(content)}; }
  static ChatMessage assistant(std::string content) { return {MessageRole::Assistant, std::move(content)}; }

  MessageRole role() const noexcept { return role_; }
  const std::string& content() const noexcept { return content_; }

  bool operator==(const ChatMessage&) const = default;

 private:
  MessageRole role_;
  std::string content_;
};

using History = std::vector<ChatMessage>;

// The five pipeline roles plus persona generation.
enum class RoleId { RolePlay, Induction, Preferred, Rejected, Judge, PersonaGen };

inline constexpr std::array<RoleId, 6> kAllRoles = {RoleId::RolePlay, RoleId::Induction, RoleId::Preferred,
                                                    RoleId::Rejected, RoleId::Judge,    RoleId::PersonaGen};

std::string_view to_string(RoleId role);
RoleId parse_role_id(std::string_view text);

struct Sampling {
  double temperature = 1.0;
  int max_tokens = 512;
};

enum class BackendKind { Http, Mock };

std::string_view to_string(BackendKind kind);
BackendKind parse_backend_kind(std::string_view text);

struct ProviderConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model_name = "gpt-4o";
  std::string api_key_env = "OPENAI_API_KEY";
  int max_retries = 3;
  int requests_per_minute = 60;
  BackendKind backend = BackendKind::Mock;

  // max_retries in [0, 8]; requests_per_minute > 0.
  void validate() const;
};

// Unit-normalized at construction so cosine similarity is a dot product.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;

  // Normalizes `raw`; throws InvalidArgument for empty or zero-norm input.
  static EmbeddingVector normalized(std::vector<double> raw);

  // Takes already-unit values verbatim (e.g. reloaded from disk); throws
  // InvalidArgument if the norm is off by more than 1e-6.
  static EmbeddingVector unit(std::vector<double> values);

  std::size_t dimension() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double norm() const;

  EmbeddingVector operator-() const;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {}
  std::vector<double> values_;
};

}  // namespace aloe::gateway
