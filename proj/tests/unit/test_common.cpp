#include <gtest/gtest.h>

#include <set>

#include "aloe/common/error.hpp"
#include "aloe/common/jsonl.hpp"
#include "aloe/common/random.hpp"
#include "aloe/common/text.hpp"
#include "support/scripted.hpp"

using namespace aloe;

TEST(StableHash, IsDeterministicAndSaltSensitive) {
  EXPECT_EQ(stable_hash("persona-00001"), stable_hash("persona-00001"));
  EXPECT_NE(stable_hash("persona-00001"), stable_hash("persona-00002"));
  EXPECT_NE(stable_hash("x", 1), stable_hash("x", 2));
}

TEST(DeriveSeed, NamespacesAreIndependent) {
  std::set<std::uint64_t> seen;
  for (const char* name : {"pool/profile", "pool/personality", "personas", "build", "eval", "mock"})
    seen.insert(derive_seed(42, name));
  EXPECT_EQ(seen.size(), 6u);
  EXPECT_NE(derive_seed(1, "build"), derive_seed(2, "build"));
}

TEST(Rng, BelowStaysInRangeAndCoversIt) {
  Rng rng(7);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 6000; ++i) {
    auto v = rng.below(6);
    ASSERT_LT(v, 6u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_GT(c, 800);
}

TEST(Rng, UniformIsHalfOpen) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, SampleIndicesAreDistinctAndInRange) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    auto idx = rng.sample_indices(100, 30);
    ASSERT_EQ(idx.size(), 30u);
    std::set<std::size_t> uniq(idx.begin(), idx.end());
    EXPECT_EQ(uniq.size(), 30u);
    for (auto i : idx) EXPECT_LT(i, 100u);
  }
  Rng rng(1);
  auto all = rng.sample_indices(5, 5);
  std::set<std::size_t> uniq(all.begin(), all.end());
  EXPECT_EQ(uniq.size(), 5u);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next(), b.next());
}

TEST(Text, TrimAndSplit) {
  EXPECT_EQ(trim("  a b \n"), "a b");
  EXPECT_EQ(strip_trailing_newlines("hi\r\n\n"), "hi");
  EXPECT_EQ(strip_trailing_newlines(" hi "), " hi ");
  auto lines = split_lines("a\r\nb\n\nc");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "a");
  EXPECT_EQ(lines[2], "");
  EXPECT_TRUE(starts_with_ci("PROFILE: x", "profile"));
  EXPECT_EQ(join({"a", "b"}, ", "), "a, b");
}

TEST(Errors, CategoriesDriveExitCodes) {
  EXPECT_EQ(category_of(ErrorCode::ConfigError), ErrorCategory::Config);
  EXPECT_EQ(category_of(ErrorCode::MissingBinding), ErrorCategory::Config);
  EXPECT_EQ(category_of(ErrorCode::ProviderExhausted), ErrorCategory::Provider);
  EXPECT_EQ(category_of(ErrorCode::EmptyCompletion), ErrorCategory::Provider);
  EXPECT_EQ(category_of(ErrorCode::EndpointFailure), ErrorCategory::Provider);
  EXPECT_EQ(category_of(ErrorCode::SchemaViolation), ErrorCategory::Data);
  Error e(ErrorCode::CountExceedsCross, "too many");
  EXPECT_NE(std::string(e.what()).find("CountExceedsCross"), std::string::npos);
}

TEST(Jsonl, AtomicWriteAndNonblankLines) {
  testkit::TempDir dir;
  auto p = dir / "x.jsonl";
  write_file_atomic(p, to_jsonl({json{{"a", 1}}, json{{"b", 2}}}));
  EXPECT_EQ(read_file(p), "{\"a\":1}\n{\"b\":2}\n");
  write_file_atomic(p, "one\n\n  \nthree\n");
  auto lines = read_nonblank_lines(p);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[1].first, 4u);
  EXPECT_EQ(lines[1].second, "three");
  EXPECT_FALSE(std::filesystem::exists(p.string() + ".tmp"));
}

TEST(Jsonl, MissingFileIsIoError) {
  try {
    read_file("/nonexistent/definitely/not/here");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Jsonl, AppenderWritesWholeLines) {
  testkit::TempDir dir;
  auto p = dir / "ledger";
  {
    LineAppender out(p);
#pragma omp parallel for num_threads(4)
    for (int i = 0; i < 200; ++i) out.append("line-" + std::to_string(i));
  }
  auto lines = read_nonblank_lines(p);
  ASSERT_EQ(lines.size(), 200u);
  std::set<std::string> uniq;
  for (auto& [_, l] : lines) uniq.insert(l);
  EXPECT_EQ(uniq.size(), 200u);
}
