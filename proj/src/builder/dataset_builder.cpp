#include "aloe/builder/dataset_builder.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>

#include <spdlog/spdlog.h>

#include "aloe/common/error.hpp"
#include "aloe/common/jsonl.hpp"
#include "aloe/common/text.hpp"

namespace aloe::builder {

namespace {

using gateway::Bindings;
using gateway::ChatMessage;
using gateway::History;
using gateway::MessageRole;
using gateway::RoleId;
namespace b = gateway::binding;

std::optional<std::string> section_value(std::string text) {
  text = trim(text);
  std::string lowered = to_lower(text);
  while (!lowered.empty() && (lowered.back() == '.' || lowered.back() == '*')) lowered.pop_back();
  if (text.empty() || lowered == "none") return std::nullopt;
  return text;
}

// Strips leading markdown emphasis / heading marks before a label.
std::string_view unmark(std::string_view line) {
  while (!line.empty() && (line.front() == '*' || line.front() == '#' || line.front() == ' ' || line.front() == '-'))
    line.remove_prefix(1);
  return line;
}

// Text after "Label:" on a labeled line, tolerating "**Label:**".
std::optional<std::string> after_label(std::string_view line, std::string_view label) {
  line = unmark(line);
  if (!starts_with_ci(line, label)) return std::nullopt;
  line.remove_prefix(label.size());
  while (!line.empty() && line.front() == '*') line.remove_prefix(1);
  if (line.empty() || line.front() != ':') return std::nullopt;
  line.remove_prefix(1);
  while (!line.empty() && line.front() == '*') line.remove_prefix(1);
  return std::string(line);
}

std::optional<std::string> personalities_label(std::string_view line) {
  if (auto v = after_label(line, "Personalities")) return v;
  if (auto v = after_label(line, "Personality traits")) return v;
  return after_label(line, "Personality");
}

}  // namespace

Bindings persona_bindings(const persona::Persona& p) {
  return {{std::string(b::kUserProfile), p.profile_text}, {std::string(b::kUserPersonalities), p.personality_text}};
}

void BuildJob::validate() const {
  if (max_turns < 1) throw Error(ErrorCode::ConfigError, "max_turns must be >= 1");
  if (parallelism < 1) throw Error(ErrorCode::ConfigError, "parallelism must be >= 1");
  if (checkpoint_path.empty()) throw Error(ErrorCode::ConfigError, "checkpoint_path must be set");
}

std::uint64_t conversation_seed(std::uint64_t global_seed, std::string_view persona_id) {
  return derive_seed(global_seed, persona_id);
}

std::string format_transcript(const History& history) {
  std::string out;
  for (const auto& m : history) {
    if (m.role() == MessageRole::System) continue;
    if (!out.empty()) out += '\n';
    out += m.role() == MessageRole::User ? "A: " : "B: ";
    out += m.content();
  }
  return out;
}

History as_role_player(const History& history) {
  History out;
  out.reserve(history.size());
  for (const auto& m : history) {
    switch (m.role()) {
      case MessageRole::User: out.push_back(ChatMessage::assistant(m.content())); break;
      case MessageRole::Assistant: out.push_back(ChatMessage::user(m.content())); break;
      case MessageRole::System: break;
    }
  }
  return out;
}

dialogue::RevealedPersona parse_induction(std::string_view completion) {
  const auto lines = split_lines(completion);
  std::optional<std::size_t> profile_line;
  std::optional<std::size_t> traits_line;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!profile_line && after_label(lines[i], "Profile")) {
      profile_line = i;
    } else if (profile_line && !traits_line && personalities_label(lines[i])) {
      traits_line = i;
    }
  }
  if (!profile_line || !traits_line)
    throw Error(ErrorCode::InductionParseFailure, "induction reply lacks the Profile:/Personalities: lines");

  std::vector<std::string> profile{*after_label(lines[*profile_line], "Profile")};
  for (std::size_t i = *profile_line + 1; i < *traits_line; ++i) profile.push_back(lines[i]);
  std::vector<std::string> traits{*personalities_label(lines[*traits_line])};
  for (std::size_t i = *traits_line + 1; i < lines.size(); ++i) traits.push_back(lines[i]);

  return {section_value(join(profile, "\n")), section_value(join(traits, "\n"))};
}

std::string DatasetBuilder::gen_user_message(const persona::Persona& persona, const History& history) const {
  return strip_trailing_newlines(gw_.complete(RoleId::RolePlay, persona_bindings(persona), as_role_player(history)));
}

dialogue::RevealedPersona DatasetBuilder::induce_persona(const persona::Persona& persona,
                                                         const History& history) const {
  if (history.empty()) throw Error(ErrorCode::InvalidArgument, "induction needs a non-empty history");
  Bindings bindings = persona_bindings(persona);
  bindings[std::string(b::kConversationHistory)] = format_transcript(history);
  const std::string first = gw_.complete(RoleId::Induction, bindings, {});
  try {
    return parse_induction(first);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InductionParseFailure) throw;
  }
  spdlog::debug("induction reply unparseable, re-asking once");
  return parse_induction(gw_.complete_reask(RoleId::Induction, bindings, {}, first, gateway::kInductionReask));
}

std::string DatasetBuilder::gen_preferred(const std::string& user_message, const History& history,
                                          const dialogue::RevealedPersona& revealed) const {
  Bindings bindings{{std::string(b::kUserMessage), user_message},
                    {std::string(b::kInferredPersona), revealed.hint_text()}};
  return strip_trailing_newlines(gw_.complete(RoleId::Preferred, bindings, history));
}

std::string DatasetBuilder::gen_rejected(const std::string& user_message, const History& history) const {
  Bindings bindings{{std::string(b::kUserMessage), user_message}};
  return strip_trailing_newlines(gw_.complete(RoleId::Rejected, bindings, history));
}

ConversationOutcome DatasetBuilder::try_conversation(const persona::Persona& persona, int max_turns,
                                                     std::uint64_t seed) const {
  ConversationOutcome outcome;
  dialogue::ConversationTree& tree = outcome.tree;
  tree.tree_id = "tree-" + persona.persona_id;
  tree.persona_id = persona.persona_id;
  tree.rng_seed = seed;
  tree.max_turns = max_turns;
  tree.complete = false;

  Rng selection(seed);
  History path;
  try {
    for (int i = 1; i <= max_turns; ++i) {
      dialogue::Turn turn;
      turn.index = i;
      turn.user_message = gen_user_message(persona, path);
      History with_message = path;
      with_message.push_back(ChatMessage::user(turn.user_message));
      turn.revealed = induce_persona(persona, with_message);
      turn.preferred = gen_preferred(turn.user_message, path, turn.revealed);
      turn.rejected = gen_rejected(turn.user_message, path);
      turn.selected = dialogue::select_branch(selection);
      path = std::move(with_message);
      path.push_back(ChatMessage::assistant(turn.selected_text()));
      tree.turns.push_back(std::move(turn));
    }
    tree.complete = true;
  } catch (const Error& e) {
    outcome.error = e;
  }
  return outcome;
}

dialogue::ConversationTree DatasetBuilder::run_conversation(const persona::Persona& persona, int max_turns,
                                                            std::uint64_t seed) const {
  if (max_turns < 1) throw Error(ErrorCode::InvalidArgument, "max_turns must be >= 1");
  auto outcome = try_conversation(persona, max_turns, seed);
  if (outcome.error) throw *outcome.error;
  return std::move(outcome.tree);
}

BatchStats DatasetBuilder::run_batch(const BuildJob& job, const std::filesystem::path& output) const {
  job.validate();
  BatchStats stats;

  std::set<std::string> wanted;
  for (const auto& p : job.personas) {
    if (!wanted.insert(p.persona_id).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate persona_id " + p.persona_id + " in job");
  }

  // Resume: any complete tree already in the checkpoint is kept as is.
  std::map<std::string, dialogue::ConversationTree> done;
  if (std::filesystem::exists(job.checkpoint_path)) {
    for (const auto& [lineno, line] : read_nonblank_lines(job.checkpoint_path)) {
      try {
        auto tree = dialogue::deserialize(line);
        if (tree.complete && wanted.count(tree.persona_id)) done.insert_or_assign(tree.persona_id, std::move(tree));
      } catch (const Error& e) {
        spdlog::warn("{}:{}: skipping unreadable checkpoint line ({})", job.checkpoint_path.string(), lineno,
                     e.what());
      }
    }
  }
  stats.resumed = done.size();

  std::vector<const persona::Persona*> todo;
  for (const auto& p : job.personas) {
    if (!done.count(p.persona_id)) todo.push_back(&p);
  }

  LineAppender checkpoint(job.checkpoint_path);
  std::mutex mutex;
  const long long n = static_cast<long long>(todo.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(job.parallelism)
  for (long long i = 0; i < n; ++i) {
    const persona::Persona& persona = *todo[static_cast<std::size_t>(i)];
    ConversationOutcome outcome;
    try {
      outcome = try_conversation(persona, job.max_turns, conversation_seed(job.global_seed, persona.persona_id));
    } catch (const std::exception& e) {
      outcome.tree.tree_id = "tree-" + persona.persona_id;
      outcome.tree.persona_id = persona.persona_id;
      outcome.tree.max_turns = job.max_turns;
      outcome.tree.complete = false;
      outcome.error = Error(ErrorCode::InvalidArgument, e.what());
    }
    const std::string line = dialogue::serialize(outcome.tree);
    std::lock_guard lock(mutex);
    checkpoint.append(line);
    if (outcome.error) {
      ++stats.failed;
      stats.failed_persona_ids.push_back(persona.persona_id);
      spdlog::warn("conversation for {} failed after {} turns: {}", persona.persona_id, outcome.tree.turns.size(),
                   outcome.error->what());
    } else {
      ++stats.completed;
      done.insert_or_assign(persona.persona_id, std::move(outcome.tree));
    }
  }
  std::sort(stats.failed_persona_ids.begin(), stats.failed_persona_ids.end());

  // std::map iteration is already persona_id order.
  std::vector<dialogue::ConversationTree> finished;
  finished.reserve(done.size());
  for (auto& [id, tree] : done) {
    stats.turns_total += tree.turns.size();
    finished.push_back(std::move(tree));
  }
  dialogue::write_dataset(output, finished);
  return stats;
}

}  // namespace aloe::builder
