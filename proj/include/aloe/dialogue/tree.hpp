#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aloe/common/random.hpp"
#include "aloe/gateway/types.hpp"

namespace aloe::dialogue {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kNoneSentinel = "None";

enum class Branch { Preferred, Rejected };

std::string_view to_string(Branch b);

// Persona facts the induction role judged revealed so far. nullopt is the
// "None" sentinel.
struct RevealedPersona {
  std::optional<std::string> profile_facts;
  std::optional<std::string> personality_traits;

  // "Profile: <facts>; Personalities: <traits>" with "None" for absent parts.
  std::string hint_text() const;

  bool operator==(const RevealedPersona&) const = default;
};

struct Turn {
  int index = 1;
  std::string user_message;
  RevealedPersona revealed;
  std::string preferred;
  std::string rejected;
  Branch selected = Branch::Preferred;

  const std::string& selected_text() const { return selected == Branch::Preferred ? preferred : rejected; }

  bool operator==(const Turn&) const = default;
};

// One persona's conversation: the selected path is the trunk and each turn
// carries its off-path sibling.
struct ConversationTree {
  std::string tree_id;
  std::string persona_id;
  std::uint64_t rng_seed = 0;
  int max_turns = 10;
  // False for a conversation aborted part way; kept only in checkpoints.
  bool complete = true;
  std::vector<Turn> turns;

  // Throws SchemaViolation naming the offending field path.
  void validate() const;

  bool operator==(const ConversationTree&) const = default;
};

// [m_1, s_1, ..., m_upto, s_upto] as alternating user/assistant messages.
// Throws IndexOutOfRange unless 0 <= upto <= turns.size().
gateway::History selected_path(const ConversationTree& tree, std::size_t upto);

// Fair coin from the tree's seeded stream.
Branch select_branch(Rng& stream);

// Canonical single-line JSON (sorted keys, no trailing newline).
std::string serialize(const ConversationTree& tree);

// Throws SchemaViolation with a field path such as "turns[1].rejected".
ConversationTree deserialize(std::string_view line);

std::vector<ConversationTree> read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const std::vector<ConversationTree>& trees);

}  // namespace aloe::dialogue
