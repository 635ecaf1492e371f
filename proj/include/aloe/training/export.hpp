#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "aloe/dialogue/tree.hpp"
#include "aloe/gateway/types.hpp"

namespace aloe::training {

// Fixed system prompt opening every exported context.
inline constexpr std::string_view kAssistantSystemPrompt = "You are a helpful assistant.";

enum class RecordSource { Aloe, AgentMix };

std::string_view to_string(RecordSource s);

struct SftRecord {
  gateway::History context;  // ends with a user message
  std::string target;
  RecordSource source = RecordSource::Aloe;
};

struct DpoRecord {
  gateway::History context;  // ends with a user message
  std::string chosen;
  std::string rejected;
};

// Defaults handed to downstream trainers through the file header.
struct TrainingHyperparameters {
  double learning_rate = 1e-5;
  int batch_size = 48;
  int sft_epochs = 3;
  int dpo_epochs = 1;
  double beta = 0.9;
};

// [system] + selected path through turn i-1 + [user: m_i], for 1-based i.
gateway::History turn_context(const dialogue::ConversationTree& tree, std::size_t turn);

// One record per turn per tree (target p_i), trees in persona_id order.
// Agent records, if any, are spliced in at seeded positions while both
// streams keep their relative order.
std::vector<SftRecord> export_sft(std::span<const dialogue::ConversationTree> trees,
                                  std::span<const SftRecord> agent_mix = {}, std::uint64_t mix_seed = 0);

// One (p_i, r_i) pair per turn per tree, trees in persona_id order.
std::vector<DpoRecord> export_dpo(std::span<const dialogue::ConversationTree> trees);

// Messages-format file: one {"messages": [{role, content}, ...]} per line
// whose last message is the assistant target. Throws AgentMixParseFailure
// with the line number.
std::vector<SftRecord> read_agent_mix(const std::filesystem::path& path);

nlohmann::json export_metadata(std::string_view kind, const TrainingHyperparameters& hp);

nlohmann::json to_json(const gateway::History& messages);
nlohmann::json to_json(const SftRecord& r);
nlohmann::json to_json(const DpoRecord& r);

// Metadata line followed by one record per line.
void write_sft(const std::filesystem::path& path, const std::vector<SftRecord>& records,
               const TrainingHyperparameters& hp = {});
void write_dpo(const std::filesystem::path& path, const std::vector<DpoRecord>& records,
               const TrainingHyperparameters& hp = {});

}  // namespace aloe::training
