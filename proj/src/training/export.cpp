#include "aloe/training/export.hpp"

#include <algorithm>

#include "aloe/common/error.hpp"
#include "aloe/common/jsonl.hpp"
#include "aloe/common/random.hpp"

namespace aloe::training {

namespace {

std::vector<const dialogue::ConversationTree*> in_persona_order(std::span<const dialogue::ConversationTree> trees) {
  std::vector<const dialogue::ConversationTree*> out;
  out.reserve(trees.size());
  for (const auto& t : trees) {
    t.validate();
    out.push_back(&t);
  }
  std::stable_sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->persona_id < b->persona_id; });
  return out;
}

}  // namespace

std::string_view to_string(RecordSource s) { return s == RecordSource::Aloe ? "aloe" : "agent_mix"; }

gateway::History turn_context(const dialogue::ConversationTree& tree, std::size_t turn) {
  if (turn < 1 || turn > tree.turns.size())
    throw Error(ErrorCode::IndexOutOfRange, "turn " + std::to_string(turn) + " outside 1.." +
                                                std::to_string(tree.turns.size()));
  gateway::History ctx;
  ctx.reserve(2 * turn);
  ctx.push_back(gateway::ChatMessage::system(std::string(kAssistantSystemPrompt)));
  auto prefix = dialogue::selected_path(tree, turn - 1);
  ctx.insert(ctx.end(), prefix.begin(), prefix.end());
  ctx.push_back(gateway::ChatMessage::user(tree.turns[turn - 1].user_message));
  return ctx;
}

std::vector<SftRecord> export_sft(std::span<const dialogue::ConversationTree> trees,
                                  std::span<const SftRecord> agent_mix, std::uint64_t mix_seed) {
  std::vector<SftRecord> aloe_records;
  for (const auto* tree : in_persona_order(trees)) {
    for (std::size_t i = 1; i <= tree->turns.size(); ++i) {
      aloe_records.push_back({turn_context(*tree, i), tree->turns[i - 1].preferred, RecordSource::Aloe});
    }
  }
  if (agent_mix.empty()) return aloe_records;

  const std::size_t total = aloe_records.size() + agent_mix.size();
  Rng rng(mix_seed);
  auto slots = rng.sample_indices(total, agent_mix.size());
  std::sort(slots.begin(), slots.end());

  std::vector<SftRecord> out;
  out.reserve(total);
  std::size_t next_aloe = 0;
  std::size_t next_agent = 0;
  for (std::size_t pos = 0; pos < total; ++pos) {
    if (next_agent < slots.size() && slots[next_agent] == pos) {
      SftRecord r = agent_mix[next_agent++];
      r.source = RecordSource::AgentMix;
      out.push_back(std::move(r));
    } else {
      out.push_back(std::move(aloe_records[next_aloe++]));
    }
  }
  return out;
}

std::vector<DpoRecord> export_dpo(std::span<const dialogue::ConversationTree> trees) {
  std::vector<DpoRecord> out;
  for (const auto* tree : in_persona_order(trees)) {
    for (std::size_t i = 1; i <= tree->turns.size(); ++i) {
      const auto& turn = tree->turns[i - 1];
      out.push_back({turn_context(*tree, i), turn.preferred, turn.rejected});
    }
  }
  return out;
}

std::vector<SftRecord> read_agent_mix(const std::filesystem::path& path) {
  std::vector<SftRecord> out;
  for (const auto& [lineno, line] : read_nonblank_lines(path)) {
    auto fail = [&, ln = lineno](const std::string& why) -> Error {
      return Error(ErrorCode::AgentMixParseFailure, path.string() + ":" + std::to_string(ln) + ": " + why);
    };
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded()) throw fail("not valid JSON");
    const json* messages = &doc;
    if (doc.is_object()) {
      auto it = doc.find("messages");
      if (it == doc.end()) throw fail("missing \"messages\"");
      messages = &*it;
    }
    if (!messages->is_array() || messages->size() < 2) throw fail("\"messages\" must list at least two turns");
    gateway::History history;
    try {
      for (const auto& m : *messages) {
        history.emplace_back(gateway::parse_message_role(m.at("role").get<std::string>()),
                             m.at("content").get<std::string>());
      }
    } catch (const json::exception& e) {
      throw fail(e.what());
    } catch (const Error& e) {
      throw fail(e.what());
    }
    if (history.back().role() != gateway::MessageRole::Assistant) throw fail("last message must be the assistant target");
    SftRecord rec;
    rec.target = history.back().content();
    history.pop_back();
    if (history.back().role() != gateway::MessageRole::User) throw fail("context must end with a user message");
    rec.context = std::move(history);
    rec.source = RecordSource::AgentMix;
    out.push_back(std::move(rec));
  }
  return out;
}

json export_metadata(std::string_view kind, const TrainingHyperparameters& hp) {
  return {{"v", 1},
          {"kind", kind},
          {"system_prompt", kAssistantSystemPrompt},
          {"hyperparameters",
           {{"learning_rate", hp.learning_rate},
            {"batch_size", hp.batch_size},
            {"sft_epochs", hp.sft_epochs},
            {"dpo_epochs", hp.dpo_epochs},
            {"beta", hp.beta}}}};
}

json to_json(const gateway::History& messages) {
  json arr = json::array();
  for (const auto& m : messages) arr.push_back({{"role", gateway::to_string(m.role())}, {"content", m.content()}});
  return arr;
}

json to_json(const SftRecord& r) {
  return {{"context", to_json(r.context)}, {"target", r.target}, {"source", to_string(r.source)}};
}

json to_json(const DpoRecord& r) {
  return {{"context", to_json(r.context)}, {"chosen", r.chosen}, {"rejected", r.rejected}};
}

void write_sft(const std::filesystem::path& path, const std::vector<SftRecord>& records,
               const TrainingHyperparameters& hp) {
  std::vector<json> rows;
  rows.reserve(records.size() + 1);
  rows.push_back(export_metadata("sft", hp));
  for (const auto& r : records) rows.push_back(to_json(r));
  write_file_atomic(path, to_jsonl(rows));
}

void write_dpo(const std::filesystem::path& path, const std::vector<DpoRecord>& records,
               const TrainingHyperparameters& hp) {
  std::vector<json> rows;
  rows.reserve(records.size() + 1);
  rows.push_back(export_metadata("dpo", hp));
  for (const auto& r : records) rows.push_back(to_json(r));
  write_file_atomic(path, to_jsonl(rows));
}

}  // namespace aloe::training
