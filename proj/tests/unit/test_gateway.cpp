#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "aloe/common/error.hpp"
#include "aloe/gateway/gateway.hpp"
#include "aloe/gateway/mock_backend.hpp"
#include "aloe/gateway/rate_limiter.hpp"
#include "aloe/gateway/similarity.hpp"
#include "support/scripted.hpp"

using namespace aloe;
using namespace aloe::gateway;
using aloe::testkit::ScriptedChatBackend;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an aloe::Error";
  return ErrorCode::InvalidArgument;
}

ChatRequest request_with(std::string text) {
  ChatRequest r;
  r.messages.push_back(ChatMessage::user(std::move(text)));
  r.model = "m";
  return r;
}

}  // namespace

TEST(ChatMessage, RejectsEmptyContent) {
  EXPECT_EQ(code_of([] { ChatMessage::user(""); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_message_role("assistant"), MessageRole::Assistant);
}

TEST(Roles, RoundTripNames) {
  for (RoleId r : kAllRoles) EXPECT_EQ(parse_role_id(to_string(r)), r);
  EXPECT_EQ(to_string(RoleId::RolePlay), "role_play");
  EXPECT_EQ(to_string(RoleId::PersonaGen), "persona_gen");
}

TEST(Templates, PlaceholdersInOrderOfAppearance) {
  RoleTemplate t{RoleId::Judge, "{User Message} vs {Model's Response} and {User Message}", Placement::FinalUser, {}};
  auto names = t.placeholders();
  ASSERT_EQ(names.size(), 2u);
  EXPECT_EQ(names[0], "User Message");
  EXPECT_EQ(names[1], "Model's Response");
}

TEST(Templates, RenderIsSinglePass) {
  RoleTemplate t{RoleId::Rejected, "Q: {User Message}", Placement::FinalUser, {}};
  EXPECT_EQ(t.render({{"User Message", "literally {User Message}"}}), "Q: literally {User Message}");
}

TEST(Templates, MissingBindingIsReported) {
  RoleTemplate t = default_template(RoleId::Judge);
  try {
    t.render({{"User Profile", "x"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingBinding);
    EXPECT_NE(std::string(e.what()).find("User Personalities"), std::string::npos);
  }
}

TEST(Templates, DefaultsUseOnlyDeclaredBindings) {
  for (RoleId r : kAllRoles) {
    auto allowed = binding_names(r);
    for (const auto& name : default_template(r).placeholders())
      EXPECT_NE(std::find(allowed.begin(), allowed.end(), name), allowed.end()) << to_string(r) << " uses " << name;
  }
  for (const auto& name : personality_generation_template().placeholders()) EXPECT_EQ(name, "Seed Examples");
}

TEST(Templates, SamplingDefaults) {
  EXPECT_DOUBLE_EQ(default_template(RoleId::Judge).sampling.temperature, 0.0);
  EXPECT_DOUBLE_EQ(default_template(RoleId::Induction).sampling.temperature, 0.0);
  EXPECT_DOUBLE_EQ(default_template(RoleId::RolePlay).sampling.temperature, 1.0);
  EXPECT_EQ(default_template(RoleId::RolePlay).placement, Placement::System);
  EXPECT_EQ(default_template(RoleId::Preferred).placement, Placement::FinalUser);
}

TEST(Templates, RegistryRejectsForeignBindings) {
  auto reg = TemplateRegistry::defaults();
  EXPECT_EQ(code_of([&] { reg.set({RoleId::Rejected, "{User Profile}", Placement::FinalUser, {}}); }),
            ErrorCode::InvalidArgument);
  reg.set({RoleId::Rejected, "Reply briefly: {User Message}", Placement::FinalUser, {0.5, 64}});
  EXPECT_EQ(reg.get(RoleId::Rejected).sampling.max_tokens, 64);
}

TEST(BuildMessages, PlacementDecidesWherePromptGoes) {
  History h{ChatMessage::user("hi"), ChatMessage::assistant("hello")};
  RoleTemplate sys{RoleId::RolePlay, "be {User Profile}", Placement::System, {}};
  auto a = build_messages(sys, {{"User Profile", "x"}, {"User Personalities", "y"}}, h);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a.front(), ChatMessage::system("be x"));
  RoleTemplate fin{RoleId::Rejected, "{User Message}", Placement::FinalUser, {}};
  auto b = build_messages(fin, {{"User Message", "q"}}, h);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b.back(), ChatMessage::user("q"));
  EXPECT_EQ(b.front(), ChatMessage::user("hi"));
}

TEST(EmbeddingVector, NormalizesAndValidates) {
  auto v = EmbeddingVector::normalized({3.0, 4.0});
  EXPECT_NEAR(v.values()[0], 0.6, 1e-12);
  EXPECT_NEAR(v.norm(), 1.0, 1e-12);
  EXPECT_EQ(code_of([] { EmbeddingVector::normalized({0.0, 0.0}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { EmbeddingVector::unit({1.0, 1.0}); }), ErrorCode::InvalidArgument);
}

TEST(Cosine, KnownValuesAndSymmetry) {
  auto a = EmbeddingVector::normalized({1, 0, 0});
  auto b = EmbeddingVector::normalized({1, 1, 0});
  EXPECT_NEAR(cosine_similarity(a, b), 1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(cosine_similarity(a, b), cosine_similarity(b, a), 1e-15);
  EXPECT_NEAR(cosine_similarity(a, -a), -1.0, 1e-12);
  EXPECT_EQ(code_of([&] { cosine_similarity(a, EmbeddingVector::normalized({1, 0})); }), ErrorCode::DimensionMismatch);
}

TEST(Cosine, SelfSimilarityIsOneForRandomVectors) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> raw(16);
    for (auto& x : raw) x = rng.uniform() - 0.5;
    auto v = EmbeddingVector::normalized(raw);
    EXPECT_NEAR(cosine_similarity(v, v), 1.0, 1e-12);
  }
}

TEST(SimilarityKernels, ParallelMatchesSerial) {
  Rng rng(11);
  const std::size_t dim = 32;
  for (std::size_t rows : {0u, 1u, 7u, 600u, 2000u}) {
    std::vector<double> m;
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<double> raw(dim);
      for (auto& x : raw) x = rng.uniform() - 0.5;
      auto v = EmbeddingVector::normalized(raw);
      m.insert(m.end(), v.values().begin(), v.values().end());
    }
    std::vector<double> q(dim);
    for (auto& x : q) x = rng.uniform() - 0.5;
    auto qv = EmbeddingVector::normalized(q);
    auto s = kernels::max_dot_serial(m, dim, qv.values());
    auto p = kernels::max_dot_parallel(m, dim, qv.values());
    ASSERT_EQ(s.has_value(), p.has_value());
    if (s) EXPECT_DOUBLE_EQ(*s, *p);
  }
}

TEST(SimilarityIndex, MaxOverAllRows) {
  SimilarityIndex idx;
  EXPECT_FALSE(idx.max_similarity(EmbeddingVector::normalized({1, 0})).has_value());
  idx.add(EmbeddingVector::normalized({1, 0}));
  idx.add(EmbeddingVector::normalized({0, 1}));
  EXPECT_EQ(idx.size(), 2u);
  EXPECT_NEAR(*idx.max_similarity(EmbeddingVector::normalized({1, 2})), 2 / std::sqrt(5.0), 1e-12);
}

TEST(RateLimiter, SlidingWindowOnSimulatedClock) {
  SimulatedClock clock;
  RateLimiter limiter(3, clock);
  for (int i = 0; i < 3; ++i) limiter.acquire();
  EXPECT_EQ(clock.total_slept(), Duration::zero());
  clock.advance(std::chrono::seconds(10));
  limiter.acquire();  // waits until the first slot ages out at t = 60 s
  EXPECT_EQ(clock.now().time_since_epoch(), std::chrono::seconds(60));
  // Never more than 3 in any 60 s window across a long run.
  std::vector<TimePoint> stamps;
  for (int i = 0; i < 20; ++i) {
    limiter.acquire();
    stamps.push_back(clock.now());
  }
  for (std::size_t i = 3; i < stamps.size(); ++i) EXPECT_GE(stamps[i] - stamps[i - 3], std::chrono::seconds(60));
}

TEST(Backoff, ExponentialWithJitterAndCap) {
  BackoffPolicy p;
  Rng rng(1);
  for (int attempt = 0; attempt < 12; ++attempt) {
    const double nominal = std::min(500.0 * std::pow(2.0, attempt), 30000.0);
    for (int i = 0; i < 50; ++i) {
      const double ms = std::chrono::duration<double, std::milli>(p.delay(attempt, rng)).count();
      EXPECT_GE(ms, 0.5 * nominal - 1e-6);
      EXPECT_LE(ms, nominal + 1e-6);
    }
  }
}

TEST(ChatEndpoint, RetriesTransientFailuresThenSucceeds) {
  auto clock = std::make_shared<SimulatedClock>();
  auto backend = std::make_shared<ScriptedChatBackend>(
      std::vector<ScriptedChatBackend::Step>{{"503", true}, {"timeout", true}, {"ok", false}});
  auto ep = aloe::testkit::endpoint(backend, clock, 3);
  EXPECT_EQ(ep->complete(request_with("q")), "ok");
  EXPECT_EQ(backend->calls(), 3u);
  // two backoff sleeps: [250, 500] ms then [500, 1000] ms
  const auto slept = std::chrono::duration<double, std::milli>(clock->total_slept()).count();
  EXPECT_GE(slept, 750.0 - 1e-6);
  EXPECT_LE(slept, 1500.0 + 1e-6);
}

TEST(ChatEndpoint, ExhaustionMakesMaxRetriesPlusOneAttempts) {
  for (int retries : {0, 1, 3}) {
    auto backend = std::make_shared<ScriptedChatBackend>(std::vector<ScriptedChatBackend::Step>{{"down", true}});
    auto ep = aloe::testkit::endpoint(backend, nullptr, retries);
    EXPECT_EQ(code_of([&] { ep->complete(request_with("q")); }), ErrorCode::ProviderExhausted);
    EXPECT_EQ(backend->calls(), static_cast<std::size_t>(retries + 1));
  }
}

TEST(ChatEndpoint, BlankCompletionsAreRetriedThenEmptyCompletion) {
  auto backend = ScriptedChatBackend::replies({"  \n", "", "fine"});
  EXPECT_EQ(aloe::testkit::endpoint(backend)->complete(request_with("q")), "fine");
  auto blank = ScriptedChatBackend::replies({" "});
  EXPECT_EQ(code_of([&] { aloe::testkit::endpoint(blank, nullptr, 2)->complete(request_with("q")); }),
            ErrorCode::EmptyCompletion);
  EXPECT_EQ(blank->calls(), 3u);
}

TEST(EmbeddingEndpoint, NormalizesAndChecksShape) {
  auto ok = std::make_shared<aloe::testkit::ScriptedEmbeddingBackend>([](const std::string& t) {
    return std::vector<double>{static_cast<double>(t.size()), 1.0};
  });
  auto vs = aloe::testkit::embedding_endpoint(ok)->embed({"abc", "a"});
  ASSERT_EQ(vs.size(), 2u);
  EXPECT_NEAR(vs[0].norm(), 1.0, 1e-12);

  auto ragged = std::make_shared<aloe::testkit::ScriptedEmbeddingBackend>(
      [](const std::string& t) { return std::vector<double>(t.size(), 1.0); });
  EXPECT_EQ(code_of([&] { aloe::testkit::embedding_endpoint(ragged)->embed({"ab", "abc"}); }),
            ErrorCode::DimensionMismatch);
}

TEST(MockBackend, DeterministicAndSaltSensitive) {
  MockChatBackend a(1), b(1);
  ChatRequest r = request_with("tell me a story");
  r.role = RoleId::Rejected;
  r.bindings = {{"User Message", "tell me a story"}};
  EXPECT_EQ(a.send(r), b.send(r));
  std::set<std::string> outs;
  for (std::uint64_t salt = 0; salt < 20; ++salt) {
    r.salt = salt;
    outs.insert(a.send(r));
  }
  EXPECT_GT(outs.size(), 1u);
}

TEST(MockBackend, JudgeEmitsADigit) {
  MockChatBackend m(3);
  ChatRequest r = request_with("rate");
  r.role = RoleId::Judge;
  r.bindings = {{"User Profile", "baker in Lyon"}, {"User Personalities", "shy"},
                {"User Message", "hi"}, {"Model's Response", "Lyon bakery life"}};
  for (std::uint64_t salt = 0; salt < 30; ++salt) {
    r.salt = salt;
    auto out = m.send(r);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_GE(out[0], '1');
    EXPECT_LE(out[0], '5');
  }
}

TEST(MockBackend, SplitClauses) {
  auto c = split_clauses("Runs a bakery, trains daily; collects records. ");
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[1], "trains daily");
}

TEST(MockEmbedding, IdenticalTextsIdenticalVectors) {
  MockEmbeddingBackend e(64);
  auto v = e.embed({"pediatric nurse in Leeds", "pediatric nurse in Leeds", "glaciology student"});
  EXPECT_EQ(v[0], v[1]);
  EXPECT_NE(v[0], v[2]);
  EXPECT_EQ(v[0].size(), 64u);
}

TEST(Gateway, RequiresEveryRole) {
  std::map<RoleId, std::shared_ptr<const ChatEndpoint>> routes;
  routes[RoleId::Judge] = aloe::testkit::endpoint(std::make_shared<MockChatBackend>(1));
  auto emb = aloe::testkit::embedding_endpoint(std::make_shared<MockEmbeddingBackend>());
  EXPECT_EQ(code_of([&] { Gateway(TemplateRegistry::defaults(), routes, emb); }), ErrorCode::ConfigError);
}

TEST(Gateway, ReaskAppendsFailedReplyAndInstruction) {
  auto cap = aloe::testkit::captured_mock_gateway(4);
  Bindings b{{"User Profile", "p"}, {"User Personalities", "q"}, {"User Message", "m"}, {"Model's Response", "r"}};
  cap.gw->complete_reask(RoleId::Judge, b, {}, "seven", kJudgeReask);
  auto reqs = cap.requests(RoleId::Judge);
  ASSERT_EQ(reqs.size(), 1u);
  const auto& msgs = reqs[0].messages;
  ASSERT_EQ(msgs.size(), 3u);
  EXPECT_EQ(msgs[1], ChatMessage::assistant("seven"));
  EXPECT_EQ(msgs[2], ChatMessage::user(std::string(kJudgeReask)));
  EXPECT_DOUBLE_EQ(reqs[0].sampling.temperature, 0.0);
}

TEST(EndpointFactory, ValidatesProviderConfig) {
  EndpointFactory f(1, std::make_shared<SimulatedClock>());
  ProviderConfig cfg;
  cfg.backend = BackendKind::Mock;
  EXPECT_NE(f.chat(cfg), nullptr);
  cfg.max_retries = 99;
  EXPECT_EQ(code_of([&] { f.chat(cfg); }), ErrorCode::ConfigError);
}
