#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "aloe/common/error.hpp"
#include "aloe/common/jsonl.hpp"
#include "aloe/common/text.hpp"
#include "aloe/eval/evaluation.hpp"
#include "aloe/gateway/mock_backend.hpp"
#include "aloe/gateway/templates.hpp"
#include "support/scripted.hpp"

using namespace aloe;
using namespace aloe::eval;
using gateway::RoleId;

namespace {

const std::vector<double> kQwenBase{2.87, 2.94, 2.88, 3.10, 3.65, 4.13, 4.50, 4.65, 4.63, 4.70};

EvalCase make_case(int n) {
  EvalCase c;
  c.case_id = "case-" + std::to_string(n);
  c.persona.persona_id = c.case_id;
  c.persona.profile_text = "Retired ferry captain in Halifax; restores wooden canoes; bakes sourdough " +
                           std::to_string(n);
  c.persona.personality_text = "Patient and methodical; quietly funny";
  return c;
}

// 100 integer rating vectors whose per-turn means equal `al` exactly.
std::vector<metrics::CaseScores> cases_for_curve(const std::vector<double>& al) {
  std::vector<metrics::CaseScores> cases(100);
  for (std::size_t i = 0; i < 100; ++i) cases[i].case_id = "c" + std::to_string(i);
  for (double v : al) {
    const int total = static_cast<int>(std::lround(v * 100));
    const int base = total / 100;
    const int ups = total - 100 * base;
    for (int i = 0; i < 100; ++i) cases[static_cast<std::size_t>(i)].ratings.push_back(base + (i < ups ? 1 : 0));
  }
  return cases;
}

std::size_t count_lines(const std::string& s) { return split_lines(strip_trailing_newlines(s)).size(); }

}  // namespace

TEST(ParseRating, StrictAndLenient) {
  EXPECT_EQ(parse_rating("4"), 4);
  EXPECT_EQ(parse_rating(" 5.\n"), 5);
  EXPECT_EQ(parse_rating("Score: 4"), 4);
  EXPECT_EQ(parse_rating("I'd give this a 3 out of 5"), 3);
  EXPECT_EQ(parse_rating("Rating 12, no wait, 2"), 2);
  EXPECT_FALSE(parse_rating("seven"));
  EXPECT_FALSE(parse_rating("0"));
  EXPECT_FALSE(parse_rating("9"));
  EXPECT_FALSE(parse_rating(""));
}

TEST(JudgeRate, ReasksOnceThenFails) {
  auto once = testkit::ScriptedChatBackend::replies({"seven", "4"});
  auto gw = testkit::mock_gateway_with({{RoleId::Judge, once}});
  auto evaluated = testkit::endpoint(std::make_shared<gateway::MockChatBackend>(1));
  Evaluator ev(*gw, evaluated);
  EXPECT_EQ(ev.judge_rate(make_case(1).persona, "hi", "hello"), 4);
  ASSERT_EQ(once->calls(), 2u);
  auto second = once->seen()[1].messages;
  EXPECT_EQ(second.back().content(), gateway::kJudgeReask);

  auto never = testkit::ScriptedChatBackend::replies({"seven"});
  auto gw2 = testkit::mock_gateway_with({{RoleId::Judge, never}});
  Evaluator ev2(*gw2, evaluated);
  try {
    ev2.judge_rate(make_case(1).persona, "hi", "hello");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RatingParseFailure);
  }
  EXPECT_EQ(never->calls(), 2u);
}

TEST(RunCase, ShapeAndBlindness) {
  auto cg = testkit::captured_mock_gateway(3);
  Evaluator ev(*cg.gw, cg.evaluated);
  const auto c = make_case(1);
  auto r = ev.run_case(c, 4, 17);
  EXPECT_EQ(r.status, CaseStatus::Completed);
  ASSERT_EQ(r.ratings.size(), 4u);
  ASSERT_EQ(r.transcript.size(), 8u);
  for (int v : r.ratings) {
    EXPECT_GE(v, 1);
    EXPECT_LE(v, 5);
  }

  auto evaluated = cg.evaluated_backend->requests();
  ASSERT_EQ(evaluated.size(), 4u);
  auto truth = gateway::split_clauses(c.persona.profile_text);
  for (auto& t : gateway::split_clauses(c.persona.personality_text)) truth.push_back(t);
  for (std::size_t i = 0; i < evaluated.size(); ++i) {
    const auto& req = evaluated[i];
    EXPECT_FALSE(req.role.has_value());
    EXPECT_TRUE(req.bindings.empty());
    EXPECT_EQ(req.messages.size(), 2 * i + 1);
    for (const auto& m : req.messages) EXPECT_NE(m.role(), gateway::MessageRole::System);
    const auto text = testkit::request_text(req);
    for (const auto& clause : truth) EXPECT_EQ(text.find(clause), std::string::npos) << clause;
  }
  // the judge sees the persona, once per turn
  auto judge = cg.requests(RoleId::Judge);
  ASSERT_EQ(judge.size(), 4u);
  EXPECT_EQ(judge[0].bindings.at("User Profile"), c.persona.profile_text);
}

TEST(RunCase, EvaluatedFailureIsEndpointFailure) {
  auto cg = testkit::captured_mock_gateway(3);
  auto down = std::make_shared<testkit::ScriptedChatBackend>(
      std::vector<testkit::ScriptedChatBackend::Step>{{"down", true}});
  Evaluator ev(*cg.gw, testkit::endpoint(down, nullptr, 1));
  try {
    ev.run_case(make_case(1), 2, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EndpointFailure);
  }
}

TEST(Run, DeterministicAndIndependentOfParallelism) {
  std::vector<EvalCase> cases;
  for (int n = 0; n < 8; ++n) cases.push_back(make_case(n));
  auto run_with = [&](int parallelism) {
    auto cg = testkit::captured_mock_gateway(4);
    EvalOptions o;
    o.max_turns = 3;
    o.parallelism = parallelism;
    o.seed = 99;
    o.record_timestamps = false;
    auto run = Evaluator(*cg.gw, cg.evaluated).run(cases, o);
    std::string all;
    for (auto& r : run.results) all += to_json(r, true).dump() + "\n";
    return all;
  };
  EXPECT_EQ(run_with(1), run_with(4));
}

TEST(Run, FailuresAreRecordedNotFatal) {
  auto cg = testkit::captured_mock_gateway(3);
  // Evaluated model fails on the third call for good: case 0 at K=2 uses two.
  auto flaky = std::make_shared<testkit::ScriptedChatBackend>(
      std::vector<testkit::ScriptedChatBackend::Step>{{"a fine reply", false}, {"another", false}, {"x", true}});
  Evaluator ev(*cg.gw, testkit::endpoint(flaky, nullptr, 0));
  testkit::TempDir dir;
  EvalOptions o;
  o.max_turns = 2;
  o.record_timestamps = false;
  o.ledger_path = dir / "ledger.jsonl";
  auto run = ev.run({make_case(0), make_case(1)}, o);
  EXPECT_EQ(run.completed(), 1u);
  EXPECT_EQ(run.failed(), 1u);
  EXPECT_EQ(run.results[1].status, CaseStatus::Failed);
  EXPECT_FALSE(run.results[1].error.empty());
  EXPECT_EQ(read_nonblank_lines(o.ledger_path).size(), 2u);
}

TEST(RunFiles, RoundTrip) {
  auto cg = testkit::captured_mock_gateway(3);
  EvalOptions o;
  o.max_turns = 3;
  o.run_id = "r1";
  o.model_label = "m";
  auto run = Evaluator(*cg.gw, cg.evaluated).run({make_case(0), make_case(1)}, o);
  ASSERT_TRUE(run.started_at.has_value());
  testkit::TempDir dir;
  write_run(dir.path(), run);
  for (const char* f : {"transcripts.jsonl", "ratings.jsonl", "run.json"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  auto back = read_run(dir.path());
  EXPECT_EQ(back.run_id, "r1");
  EXPECT_EQ(back.model_label, "m");
  EXPECT_EQ(back.max_turns, 3);
  EXPECT_EQ(back.started_at, run.started_at);
  ASSERT_EQ(back.results.size(), 2u);
  EXPECT_EQ(back.results[1].ratings, run.results[1].ratings);
  EXPECT_EQ(back.results[1].transcript, run.results[1].transcript);
}

TEST(ReadCases, SampleFileAndErrors) {
  auto cases = read_cases(std::filesystem::path(ALOE_SOURCE_DIR) / "data/eval/sample_cases.jsonl");
  ASSERT_EQ(cases.size(), 5u);
  EXPECT_EQ(cases[0].case_id, "case-001");
  EXPECT_EQ(cases[0].persona.persona_id, "case-001");
  EXPECT_FALSE(cases[0].persona.profile_text.empty());

  testkit::TempDir dir;
  const std::string ok = R"({"case_id":"a","profile_text":"p","personality_text":"q","verified":true})";
  write_file_atomic(dir / "dup.jsonl", ok + "\n" + ok + "\n");
  EXPECT_THROW(read_cases(dir / "dup.jsonl"), Error);
  write_file_atomic(dir / "empty.jsonl", R"({"case_id":"a","profile_text":"","personality_text":"q"})");
  EXPECT_THROW(read_cases(dir / "empty.jsonl"), Error);
}

TEST(Report, ConstantRatingsGiveFlatFit) {
  std::vector<metrics::CaseScores> cases{{"a", std::vector<int>(10, 5)}, {"b", std::vector<int>(10, 5)}};
  auto r = build_report(cases, 10);
  EXPECT_EQ(r.average_al, 5.0);
  EXPECT_EQ(r.ir.slope, 0.0);
  EXPECT_EQ(r.ir.r_squared, 0.0);
  EXPECT_EQ(r.n_ir.slope, 0.0);
}

TEST(Report, ReproducesQwenRowFromRatings) {
  auto cases = cases_for_curve(kQwenBase);
  auto r = build_report(cases, 10, {}, "qwen2-base");
  for (std::size_t k = 0; k < 10; ++k) EXPECT_NEAR(r.al_by_turn.values[k], kQwenBase[k], 1e-12);
  EXPECT_NEAR(r.average_al, 3.81, 0.005);
  EXPECT_NEAR(r.ir.slope, 0.254, 0.002);
  EXPECT_NEAR(r.ir.r_squared, 0.917, 0.005);
  EXPECT_NEAR(r.n_ir.slope, 0.138, 0.002);
  EXPECT_NEAR(r.n_ir.r_squared, 0.918, 0.002);
}

TEST(Report, UsesCompletedCasesOnly) {
  EvalRun run;
  run.max_turns = 2;
  for (int i = 0; i < 10; ++i) {
    CaseResult c;
    c.case_id = "c" + std::to_string(i);
    if (i == 3 || i == 7) {
      c.status = CaseStatus::Failed;
      c.error = "boom";
    } else {
      c.ratings = {2, 4};
    }
    run.results.push_back(c);
  }
  auto r = build_report(run);
  EXPECT_EQ(r.al_by_turn.case_count, 8u);
  EXPECT_EQ(r.failed_case_ids, (std::vector<std::string>{"c3", "c7"}));
  EXPECT_EQ(r.al_by_turn.values, (std::vector<double>{2.0, 4.0}));
  EXPECT_NE(render(r, RenderFormat::Table).find("cases: 8 completed, 2 failed (c3, c7)"), std::string::npos);
}

TEST(Report, Errors) {
  auto code = [](const std::function<void()>& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  EvalRun run;
  run.max_turns = 2;
  run.results.push_back({"a", CaseStatus::Failed, {}, {}, "x"});
  EXPECT_EQ(code([&] { build_report(run); }), ErrorCode::NoCompletedCases);
  std::vector<metrics::CaseScores> short_case{{"a", {3}}};
  EXPECT_EQ(code([&] { build_report(short_case, 2); }), ErrorCode::SchemaViolation);
  std::vector<metrics::CaseScores> one{{"a", {3}}};
  EXPECT_EQ(code([&] { build_report(one, 1); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code([] { parse_render_format("xml"); }), ErrorCode::ConfigError);
}

TEST(Render, FormatsAgree) {
  auto r = build_report(cases_for_curve(kQwenBase), 10, {}, "qwen2");
  const auto table = render(r, RenderFormat::Table);
  EXPECT_EQ(count_lines(table), 3u);
  EXPECT_NE(table.find("2.87"), std::string::npos);
  EXPECT_NE(table.find("0.254"), std::string::npos);
  EXPECT_NE(table.find("N-R²"), std::string::npos);

  const auto csv = render(r, RenderFormat::Csv);
  EXPECT_EQ(count_lines(csv), 1u + 10u + 2u);

  const auto plot = render(r, RenderFormat::PlotData);
  auto lines = split_lines(strip_trailing_newlines(plot));
  ASSERT_EQ(lines.size(), 11u);
  for (std::size_t k = 1; k <= 10; ++k) {
    std::istringstream in(lines[k]);
    double kk, al, fitted;
    in >> kk >> al >> fitted;
    EXPECT_EQ(kk, static_cast<double>(k));
    EXPECT_NEAR(al, kQwenBase[k - 1], 1e-6);
    EXPECT_NEAR(fitted, r.ir.predict(static_cast<double>(k)), 1e-6);
  }
}
