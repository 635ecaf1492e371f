#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "aloe/common/error.hpp"
#include "aloe/common/random.hpp"
#include "aloe/dialogue/tree.hpp"
#include "support/scripted.hpp"

using namespace aloe;
using namespace aloe::dialogue;

namespace {

ConversationTree sample_tree(int turns = 3) {
  ConversationTree t;
  t.tree_id = "tree-persona-00001";
  t.persona_id = "persona-00001";
  t.rng_seed = 18000000000000000000ull;  // above INT64_MAX on purpose
  t.max_turns = 4;
  for (int i = 1; i <= turns; ++i) {
    Turn turn;
    turn.index = i;
    turn.user_message = "m" + std::to_string(i);
    turn.preferred = "p" + std::to_string(i);
    turn.rejected = "r" + std::to_string(i);
    turn.selected = i % 2 ? Branch::Preferred : Branch::Rejected;
    if (i > 1) turn.revealed.profile_facts = "bakes bread";
    t.turns.push_back(turn);
  }
  return t;
}

std::string violation_of(std::string_view line) {
  try {
    deserialize(line);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaViolation);
    return e.what();
  }
  ADD_FAILURE() << "expected SchemaViolation";
  return {};
}

}  // namespace

TEST(RevealedPersona, HintUsesNoneSentinel) {
  RevealedPersona r;
  EXPECT_EQ(r.hint_text(), "Profile: None; Personalities: None");
  r.profile_facts = "nurse";
  EXPECT_EQ(r.hint_text(), "Profile: nurse; Personalities: None");
}

TEST(SelectedPath, AlternatesAlongTheTrunk) {
  auto t = sample_tree();
  auto path = selected_path(t, 3);
  ASSERT_EQ(path.size(), 6u);
  EXPECT_EQ(path[0], gateway::ChatMessage::user("m1"));
  EXPECT_EQ(path[1], gateway::ChatMessage::assistant("p1"));
  EXPECT_EQ(path[3], gateway::ChatMessage::assistant("r2"));
  EXPECT_TRUE(selected_path(t, 0).empty());
  EXPECT_THROW(selected_path(t, 4), Error);
}

TEST(SelectBranch, RoughlyFair) {
  Rng rng(17);
  int preferred = 0;
  for (int i = 0; i < 10000; ++i) preferred += select_branch(rng) == Branch::Preferred;
  EXPECT_NEAR(preferred / 10000.0, 0.5, 0.02);
}

TEST(TreeJson, RoundTripIsExact) {
  auto t = sample_tree();
  auto line = serialize(t);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(deserialize(line), t);
  EXPECT_EQ(serialize(deserialize(line)), line);
}

TEST(TreeJson, RoundTripPropertyOverRandomTrees) {
  Rng rng(3);
  for (int n = 0; n < 100; ++n) {
    ConversationTree t;
    t.tree_id = "t" + std::to_string(n);
    t.persona_id = "p" + std::to_string(n);
    t.rng_seed = rng.next();
    t.max_turns = 1 + static_cast<int>(rng.below(10));
    const int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(t.max_turns) + 1));
    for (int i = 1; i <= k; ++i) {
      Turn turn;
      turn.index = i;
      turn.user_message = "msg \"quoted\" é " + std::to_string(rng.next());
      turn.preferred = "pref\n" + std::to_string(i);
      turn.rejected = "rej\t" + std::to_string(i);
      turn.selected = rng.coin() ? Branch::Preferred : Branch::Rejected;
      if (rng.coin()) turn.revealed.profile_facts = "facts " + std::to_string(i);
      if (rng.coin()) turn.revealed.personality_traits = "traits";
      t.turns.push_back(turn);
    }
    ASSERT_EQ(deserialize(serialize(t)), t);
  }
}

TEST(TreeJson, KeysAreSorted) {
  auto line = serialize(sample_tree(1));
  EXPECT_LT(line.find("\"complete\""), line.find("\"max_turns\""));
  EXPECT_LT(line.find("\"persona_id\""), line.find("\"tree_id\""));
  EXPECT_NE(line.find("\"profile\":\"None\""), std::string::npos);
}

TEST(TreeJson, ErrorsNameTheFieldPath) {
  auto j = nlohmann::json::parse(serialize(sample_tree()));
  j["turns"][1].erase("rejected");
  EXPECT_NE(violation_of(j.dump()).find("turns[1].rejected"), std::string::npos);

  j = nlohmann::json::parse(serialize(sample_tree()));
  j["turns"][2]["index"] = 7;
  EXPECT_NE(violation_of(j.dump()).find("turns[2].index"), std::string::npos);

  j = nlohmann::json::parse(serialize(sample_tree()));
  j["turns"][0]["selected"] = "sideways";
  EXPECT_NE(violation_of(j.dump()).find("turns[0].selected"), std::string::npos);

  EXPECT_FALSE(violation_of("{not json").empty());
}

TEST(TreeValidate, RejectsTooManyTurnsAndEmptyText) {
  auto t = sample_tree(3);
  t.max_turns = 2;
  EXPECT_THROW(t.validate(), Error);
  t = sample_tree(3);
  t.turns[0].preferred.clear();
  EXPECT_THROW(t.validate(), Error);
}

TEST(Dataset, FileRoundTrip) {
  testkit::TempDir dir;
  std::vector<ConversationTree> trees{sample_tree(2), sample_tree(4)};
  trees[1].persona_id = "persona-00002";
  trees[1].tree_id = "tree-persona-00002";
  write_dataset(dir / "d.jsonl", trees);
  EXPECT_EQ(read_dataset(dir / "d.jsonl"), trees);
}
