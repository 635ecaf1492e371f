#include "aloe/dialogue/tree.hpp"

#include "aloe/common/error.hpp"
#include "aloe/common/jsonl.hpp"

namespace aloe::dialogue {

namespace {

[[noreturn]] void violation(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, path + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) violation(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) violation(path.empty() ? key : path + "." + key, "missing field");
  return *it;
}

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string require_string(const json& obj, const std::string& key, const std::string& path, bool non_empty) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) violation(child(path, key), "expected a string");
  auto s = v.get<std::string>();
  if (non_empty && s.empty()) violation(child(path, key), "must be non-empty");
  return s;
}

json optional_text(const std::optional<std::string>& v) { return v ? *v : std::string(kNoneSentinel); }

std::optional<std::string> parse_optional_text(const std::string& s) {
  if (s == kNoneSentinel) return std::nullopt;
  return s;
}

}  // namespace

std::string_view to_string(Branch b) { return b == Branch::Preferred ? "preferred" : "rejected"; }

std::string RevealedPersona::hint_text() const {
  return "Profile: " + profile_facts.value_or(std::string(kNoneSentinel)) +
         "; Personalities: " + personality_traits.value_or(std::string(kNoneSentinel));
}

void ConversationTree::validate() const {
  if (tree_id.empty()) violation("tree_id", "must be non-empty");
  if (persona_id.empty()) violation("persona_id", "must be non-empty");
  if (max_turns < 1) violation("max_turns", "must be >= 1");
  if (static_cast<int>(turns.size()) > max_turns) violation("turns", "more turns than max_turns");
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const std::string p = "turns[" + std::to_string(i) + "]";
    const Turn& t = turns[i];
    if (t.index != static_cast<int>(i) + 1) violation(p + ".index", "indices must run 1..K without gaps");
    if (t.user_message.empty()) violation(p + ".user_message", "must be non-empty");
    if (t.preferred.empty()) violation(p + ".preferred", "must be non-empty");
    if (t.rejected.empty()) violation(p + ".rejected", "must be non-empty");
  }
}

gateway::History selected_path(const ConversationTree& tree, std::size_t upto) {
  if (upto > tree.turns.size())
    throw Error(ErrorCode::IndexOutOfRange,
                "prefix " + std::to_string(upto) + " exceeds " + std::to_string(tree.turns.size()) + " turns");
  gateway::History out;
  out.reserve(upto * 2);
  for (std::size_t i = 0; i < upto; ++i) {
    out.push_back(gateway::ChatMessage::user(tree.turns[i].user_message));
    out.push_back(gateway::ChatMessage::assistant(tree.turns[i].selected_text()));
  }
  return out;
}

Branch select_branch(Rng& stream) { return stream.coin() ? Branch::Preferred : Branch::Rejected; }

std::string serialize(const ConversationTree& tree) {
  tree.validate();
  json turns = json::array();
  for (const Turn& t : tree.turns) {
    turns.push_back({{"index", t.index},
                     {"user_message", t.user_message},
                     {"revealed",
                      {{"profile", optional_text(t.revealed.profile_facts)},
                       {"personalities", optional_text(t.revealed.personality_traits)}}},
                     {"preferred", t.preferred},
                     {"rejected", t.rejected},
                     {"selected", to_string(t.selected)}});
  }
  json doc = {{"v", kSchemaVersion},
              {"tree_id", tree.tree_id},
              {"persona_id", tree.persona_id},
              {"rng_seed", tree.rng_seed},
              {"max_turns", tree.max_turns},
              {"complete", tree.complete},
              {"turns", std::move(turns)}};
  return doc.dump();
}

ConversationTree deserialize(std::string_view line) {
  json doc = json::parse(line, nullptr, false);
  if (doc.is_discarded()) violation("$", "not valid JSON");
  if (!doc.is_object()) violation("$", "expected an object");
  const json& v = require(doc, "v", "");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
    violation("v", "unsupported schema version (expected 1)");

  ConversationTree tree;
  tree.tree_id = require_string(doc, "tree_id", "", true);
  tree.persona_id = require_string(doc, "persona_id", "", true);
  const json& seed = require(doc, "rng_seed", "");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
    violation("rng_seed", "expected an unsigned integer");
  tree.rng_seed = seed.get<std::uint64_t>();
  const json& mt = require(doc, "max_turns", "");
  if (!mt.is_number_integer()) violation("max_turns", "expected an integer");
  tree.max_turns = mt.get<int>();
  if (auto it = doc.find("complete"); it != doc.end()) {
    if (!it->is_boolean()) violation("complete", "expected a boolean");
    tree.complete = it->get<bool>();
  }
  const json& turns = require(doc, "turns", "");
  if (!turns.is_array()) violation("turns", "expected an array");
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const std::string p = "turns[" + std::to_string(i) + "]";
    const json& tj = turns[i];
    if (!tj.is_object()) violation(p, "expected an object");
    Turn t;
    const json& idx = require(tj, "index", p);
    if (!idx.is_number_integer()) violation(p + ".index", "expected an integer");
    t.index = idx.get<int>();
    t.user_message = require_string(tj, "user_message", p, true);
    const json& rev = require(tj, "revealed", p);
    t.revealed.profile_facts = parse_optional_text(require_string(rev, "profile", p + ".revealed", false));
    t.revealed.personality_traits =
        parse_optional_text(require_string(rev, "personalities", p + ".revealed", false));
    t.preferred = require_string(tj, "preferred", p, true);
    t.rejected = require_string(tj, "rejected", p, true);
    const std::string sel = require_string(tj, "selected", p, true);
    if (sel == "preferred") {
      t.selected = Branch::Preferred;
    } else if (sel == "rejected") {
      t.selected = Branch::Rejected;
    } else {
      violation(p + ".selected", "must be 'preferred' or 'rejected'");
    }
    tree.turns.push_back(std::move(t));
  }
  tree.validate();
  return tree;
}

std::vector<ConversationTree> read_dataset(const std::filesystem::path& path) {
  std::vector<ConversationTree> out;
  for (const auto& [lineno, line] : read_nonblank_lines(path)) {
    try {
      out.push_back(deserialize(line));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, const std::vector<ConversationTree>& trees) {
  std::string body;
  for (const auto& t : trees) {
    body += serialize(t);
    body += '\n';
  }
  write_file_atomic(path, body);
}

}  // namespace aloe::dialogue
