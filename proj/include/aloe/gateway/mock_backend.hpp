#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "aloe/gateway/backend.hpp"

namespace aloe::gateway {

// Splits a persona description into its fact/trait clauses on '.', ';' and
// ',' boundaries. Clauses are trimmed; empty ones dropped.
std::vector<std::string> split_clauses(std::string_view text);

// Offline stand-in for every role. Output is a pure function of
// (role, bindings, messages, salt, seed) and follows a per-role grammar so
// downstream parsers see realistic shapes:
//   judge        a lone digit 1-5
//   induction    "Profile: ...\nPersonalities: ..." revealing one more
//                profile clause per user turn seen in the history
//   persona_gen  newline-separated recombinations of the few-shot clauses
//   role_play / preferred / rejected / evaluated
//                short conversational lines that reuse single words, never
//                whole persona clauses
class MockChatBackend final : public ChatBackend {
 public:
  explicit MockChatBackend(std::uint64_t seed) : seed_(seed) {}

  std::string send(const ChatRequest& request) override;

 private:
  std::uint64_t seed_;
};

// Signed feature hashing over lowercase word tokens. Identical texts map to
// identical vectors; texts sharing vocabulary score higher.
class MockEmbeddingBackend final : public EmbeddingBackend {
 public:
  explicit MockEmbeddingBackend(std::size_t dimension = 256) : dimension_(dimension) {}

  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

 private:
  std::size_t dimension_;
};

}  // namespace aloe::gateway
