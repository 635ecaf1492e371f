#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aloe/common/error.hpp"
#include "aloe/dialogue/tree.hpp"
#include "aloe/gateway/gateway.hpp"
#include "aloe/persona/persona.hpp"

namespace aloe::builder {

struct BuildJob {
  std::vector<persona::Persona> personas;
  int max_turns = 10;
  int parallelism = 1;
  std::filesystem::path checkpoint_path;
  std::uint64_t global_seed = 0;

  void validate() const;
};

struct BatchStats {
  std::size_t completed = 0;  // conversations finished in this run
  std::size_t resumed = 0;    // already complete in the checkpoint
  std::size_t failed = 0;
  std::size_t turns_total = 0;  // turns in the finalized dataset
  std::vector<std::string> failed_persona_ids;
};

// Selection seed of one conversation; independent of every other persona.
std::uint64_t conversation_seed(std::uint64_t global_seed, std::string_view persona_id);

// {User Profile} and {User Personalities} of the ground-truth persona.
gateway::Bindings persona_bindings(const persona::Persona& p);

// "A: <user>\nB: <assistant>\n..." as the induction prompt expects.
std::string format_transcript(const gateway::History& history);

// The same conversation from the simulated user's side: user and assistant
// swap so the role-play model speaks as the assistant.
gateway::History as_role_player(const gateway::History& history);

// Parses the two labeled sections of an induction reply. The profile
// section runs until the "Personalities:" label. "None" maps to nullopt.
// Throws InductionParseFailure when either label is missing.
dialogue::RevealedPersona parse_induction(std::string_view completion);

struct ConversationOutcome {
  dialogue::ConversationTree tree;  // complete == false on failure
  std::optional<Error> error;
};

// Drives the role-play, induction, preferred and rejected roles through K
// turns for one persona. Each turn:
//   m_i      <- role-play(persona, selected path)
//   revealed <- induction(persona, selected path + m_i)
//   p_i      <- preferred(m_i + hint(revealed), selected path)
//   r_i      <- rejected(m_i, selected path)
//   s_i      <- coin flip between p_i and r_i
class DatasetBuilder {
 public:
  explicit DatasetBuilder(const gateway::Gateway& gw) : gw_(gw) {}

  std::string gen_user_message(const persona::Persona& persona, const gateway::History& history) const;

  // `history` must already end with the current user message.
  dialogue::RevealedPersona induce_persona(const persona::Persona& persona, const gateway::History& history) const;

  std::string gen_preferred(const std::string& user_message, const gateway::History& history,
                            const dialogue::RevealedPersona& revealed) const;

  std::string gen_rejected(const std::string& user_message, const gateway::History& history) const;

  // Throws the first role error.
  dialogue::ConversationTree run_conversation(const persona::Persona& persona, int max_turns,
                                              std::uint64_t seed) const;

  // Never throws for role errors; the partial tree is returned instead.
  ConversationOutcome try_conversation(const persona::Persona& persona, int max_turns, std::uint64_t seed) const;

  // Runs every persona not already complete in the checkpoint, appending
  // each finished (or aborted) tree to it, then writes the complete trees
  // sorted by persona_id to `output`.
  BatchStats run_batch(const BuildJob& job, const std::filesystem::path& output) const;

 private:
  const gateway::Gateway& gw_;
};

}  // namespace aloe::builder
