#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "aloe/common/error.hpp"
#include "aloe/common/jsonl.hpp"
#include "aloe/common/random.hpp"
#include "aloe/training/export.hpp"
#include "aloe/training/losses.hpp"
#include "support/scripted.hpp"

using namespace aloe;
using namespace aloe::training;
using gateway::ChatMessage;
using json = nlohmann::json;

namespace {

dialogue::ConversationTree tree_for(const std::string& pid, int turns) {
  dialogue::ConversationTree t;
  t.persona_id = pid;
  t.tree_id = "tree-" + pid;
  t.max_turns = turns;
  for (int i = 1; i <= turns; ++i) {
    dialogue::Turn turn;
    turn.index = i;
    turn.user_message = pid + "/m" + std::to_string(i);
    turn.preferred = pid + "/p" + std::to_string(i);
    turn.rejected = pid + "/r" + std::to_string(i);
    turn.selected = i % 2 ? dialogue::Branch::Rejected : dialogue::Branch::Preferred;
    t.turns.push_back(turn);
  }
  return t;
}

// Plain -log(1 / (1 + e^-x)); fine for the moderate inputs used here.
double oracle_nls(double x) { return -std::log(1.0 / (1.0 + std::exp(-x))); }

void expect_code(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    ADD_FAILURE() << "no throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(TurnContext, SystemThenTrunkThenMessage) {
  auto t = tree_for("a", 3);
  auto ctx = turn_context(t, 3);
  ASSERT_EQ(ctx.size(), 6u);
  EXPECT_EQ(ctx[0], ChatMessage::system(std::string(kAssistantSystemPrompt)));
  EXPECT_EQ(ctx[1], ChatMessage::user("a/m1"));
  EXPECT_EQ(ctx[2], ChatMessage::assistant("a/r1"));  // selected branch, not preferred
  EXPECT_EQ(ctx[4], ChatMessage::assistant("a/p2"));
  EXPECT_EQ(ctx[5], ChatMessage::user("a/m3"));
  expect_code(ErrorCode::IndexOutOfRange, [&] { turn_context(t, 0); });
  expect_code(ErrorCode::IndexOutOfRange, [&] { turn_context(t, 4); });
}

TEST(ExportSft, OneRecordPerTurnInPersonaOrder) {
  std::vector<dialogue::ConversationTree> trees{tree_for("b", 2), tree_for("a", 3)};
  auto recs = export_sft(trees);
  ASSERT_EQ(recs.size(), 5u);
  EXPECT_EQ(recs[0].target, "a/p1");
  EXPECT_EQ(recs[2].target, "a/p3");
  EXPECT_EQ(recs[3].target, "b/p1");
  for (const auto& r : recs) {
    EXPECT_EQ(r.source, RecordSource::Aloe);
    EXPECT_EQ(r.context.back().role(), gateway::MessageRole::User);
  }
}

TEST(ExportDpo, PairsPreferredWithRejected) {
  std::vector<dialogue::ConversationTree> trees{tree_for("x", 4)};
  auto recs = export_dpo(trees);
  ASSERT_EQ(recs.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(recs[i].chosen, "x/p" + std::to_string(i + 1));
    EXPECT_EQ(recs[i].rejected, "x/r" + std::to_string(i + 1));
    EXPECT_EQ(recs[i].context, turn_context(trees[0], i + 1));
  }
}

TEST(ExportSft, AgentMixKeepsBothStreamsInOrder) {
  std::vector<dialogue::ConversationTree> trees{tree_for("a", 5), tree_for("b", 5)};
  std::vector<SftRecord> agent;
  for (int i = 0; i < 7; ++i)
    agent.push_back({{ChatMessage::user("task " + std::to_string(i))}, "agent-" + std::to_string(i),
                     RecordSource::AgentMix});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto mixed = export_sft(trees, agent, seed);
    ASSERT_EQ(mixed.size(), 17u);
    std::vector<std::string> aloe_targets, agent_targets;
    for (auto& r : mixed) (r.source == RecordSource::Aloe ? aloe_targets : agent_targets).push_back(r.target);
    ASSERT_EQ(agent_targets.size(), 7u);
    for (int i = 0; i < 7; ++i) EXPECT_EQ(agent_targets[static_cast<std::size_t>(i)], "agent-" + std::to_string(i));
    auto plain = export_sft(trees);
    for (std::size_t i = 0; i < plain.size(); ++i) EXPECT_EQ(aloe_targets[i], plain[i].target);
  }
  EXPECT_NE(json(to_json(export_sft(trees, agent, 1)[0])).dump(), "");
}

TEST(AgentMix, ReadsObjectsAndBareArrays) {
  testkit::TempDir dir;
  auto p = dir / "mix.jsonl";
  write_file_atomic(p,
                    "{\"messages\":[{\"role\":\"system\",\"content\":\"s\"},{\"role\":\"user\",\"content\":\"u\"},"
                    "{\"role\":\"assistant\",\"content\":\"a\"}]}\n"
                    "\n"
                    "[{\"role\":\"user\",\"content\":\"q\"},{\"role\":\"assistant\",\"content\":\"r\"}]\n");
  auto recs = read_agent_mix(p);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].context.size(), 2u);
  EXPECT_EQ(recs[0].target, "a");
  EXPECT_EQ(recs[1].target, "r");
  EXPECT_EQ(recs[1].source, RecordSource::AgentMix);
}

TEST(AgentMix, ErrorsCarryLineNumbers) {
  testkit::TempDir dir;
  auto p = dir / "bad.jsonl";
  const std::vector<std::string> bad = {
      "not json",
      "{\"msgs\":[]}",
      "[{\"role\":\"user\",\"content\":\"q\"}]",
      "[{\"role\":\"user\",\"content\":\"q\"},{\"role\":\"user\",\"content\":\"r\"}]",
      "[{\"role\":\"assistant\",\"content\":\"q\"},{\"role\":\"assistant\",\"content\":\"r\"}]",
      "[{\"role\":\"robot\",\"content\":\"q\"},{\"role\":\"assistant\",\"content\":\"r\"}]",
  };
  for (const auto& line : bad) {
    write_file_atomic(p, "[{\"role\":\"user\",\"content\":\"ok\"},{\"role\":\"assistant\",\"content\":\"ok\"}]\n" +
                             line + "\n");
    try {
      read_agent_mix(p);
      ADD_FAILURE() << line;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::AgentMixParseFailure);
      EXPECT_NE(std::string(e.what()).find("bad.jsonl:2:"), std::string::npos) << e.what();
    }
  }
}

TEST(WriteExports, MetadataLineThenRecords) {
  testkit::TempDir dir;
  std::vector<dialogue::ConversationTree> trees{tree_for("a", 2)};
  write_sft(dir / "sft.jsonl", export_sft(trees));
  write_dpo(dir / "dpo.jsonl", export_dpo(trees));
  auto sft = read_nonblank_lines(dir / "sft.jsonl");
  ASSERT_EQ(sft.size(), 3u);
  auto meta = json::parse(sft[0].second);
  EXPECT_EQ(meta["kind"], "sft");
  EXPECT_EQ(meta["system_prompt"], "You are a helpful assistant.");
  EXPECT_EQ(meta["hyperparameters"]["batch_size"], 48);
  EXPECT_DOUBLE_EQ(meta["hyperparameters"]["learning_rate"].get<double>(), 1e-5);
  EXPECT_DOUBLE_EQ(meta["hyperparameters"]["beta"].get<double>(), 0.9);
  auto rec = json::parse(sft[1].second);
  EXPECT_EQ(rec["target"], "a/p1");
  EXPECT_EQ(rec["source"], "aloe");
  EXPECT_EQ(rec["context"][0]["role"], "system");

  auto dpo = read_nonblank_lines(dir / "dpo.jsonl");
  ASSERT_EQ(dpo.size(), 3u);
  EXPECT_EQ(json::parse(dpo[0].second)["kind"], "dpo");
  EXPECT_EQ(json::parse(dpo[2].second)["rejected"], "a/r2");
}

TEST(SftLoss, NegatedSumOfPolicyLogProbs) {
  EXPECT_DOUBLE_EQ(sft_loss({{-0.5, -1.25, 0.0}, ModelOwner::Policy}), 1.75);
  expect_code(ErrorCode::PositiveLogProb, [] { sft_loss({{-0.5, 0.1}, ModelOwner::Policy}); });
  expect_code(ErrorCode::InvalidArgument, [] { sft_loss({{-0.5}, ModelOwner::Reference}); });
  expect_code(ErrorCode::InvalidArgument, [] { sft_loss({{}, ModelOwner::Policy}); });
}

TEST(DpoLoss, EqualPolicyAndReferenceGivesKLn2) {
  std::vector<double> c(10), r(10);
  Rng rng(4);
  for (int i = 0; i < 10; ++i) {
    c[static_cast<std::size_t>(i)] = -10.0 * rng.uniform();
    r[static_cast<std::size_t>(i)] = -10.0 * rng.uniform();
  }
  auto out = dpo_loss(c, c, r, r, {0.9});
  EXPECT_NEAR(out.loss, 10.0 * std::log(2.0), 1e-9);
  EXPECT_NEAR(out.signed_sum, -10.0 * std::log(2.0), 1e-9);
}

TEST(DpoLoss, SingleMarginAnchor) {
  // margin 1.0 with beta 0.9
  std::vector<double> pc{-1.0}, rc{-2.0}, pr{-3.0}, rr{-3.0};
  auto out = dpo_loss(pc, rc, pr, rr, {0.9});
  EXPECT_NEAR(out.loss, 0.3412, 1e-4);
  EXPECT_NEAR(out.loss, oracle_nls(0.9), 1e-12);
}

TEST(DpoLoss, MatchesOracleOnRandomInputs) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + rng.below(12);
    std::vector<double> pc(k), rc(k), pr(k), rr(k);
    double expect = 0.0;
    const double beta = 0.05 + rng.uniform();
    for (std::size_t i = 0; i < k; ++i) {
      pc[i] = -20 * rng.uniform();
      rc[i] = -20 * rng.uniform();
      pr[i] = -20 * rng.uniform();
      rr[i] = -20 * rng.uniform();
      expect += oracle_nls(beta * ((pc[i] - rc[i]) - (pr[i] - rr[i])));
    }
    auto out = dpo_loss(pc, rc, pr, rr, {beta});
    ASSERT_NEAR(out.loss, expect, 1e-9 * (1 + expect));
    ASSERT_EQ(out.per_turn.size(), k);
  }
}

TEST(DpoLoss, StableAtExtremeMargins) {
  EXPECT_NEAR(neg_log_sigmoid(-1000.0), 1000.0, 1e-9);
  EXPECT_NEAR(neg_log_sigmoid(1000.0), 0.0, 1e-12);
  EXPECT_TRUE(std::isfinite(neg_log_sigmoid(-1e6)));
}

TEST(DpoLoss, RejectsBadInputs) {
  std::vector<double> a{-1.0}, b{-1.0, -2.0}, pos{0.5};
  expect_code(ErrorCode::LengthMismatch, [&] { dpo_loss(a, b, a, a); });
  expect_code(ErrorCode::PositiveLogProb, [&] { dpo_loss(pos, a, a, a); });
  expect_code(ErrorCode::InvalidArgument, [&] { dpo_loss(a, a, a, a, {0.0}); });
}
