#include "aloe/persona/pool.hpp"

#include <cctype>
#include <cstdio>

#include <spdlog/spdlog.h>

#include "aloe/common/error.hpp"
#include "aloe/common/jsonl.hpp"
#include "aloe/common/random.hpp"
#include "aloe/common/text.hpp"

namespace aloe::persona {

namespace {

// "- x", "* x", "• x", "3. x", "3) x" -> "x"
std::string strip_list_marker(std::string_view line) {
  for (std::string_view bullet : {"- ", "* ", "\xE2\x80\xA2 "}) {
    if (line.substr(0, bullet.size()) == bullet) return trim(line.substr(bullet.size()));
  }
  std::size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i > 0 && i + 1 < line.size() && (line[i] == '.' || line[i] == ')') && line[i + 1] == ' ')
    return trim(line.substr(i + 1));
  return std::string(line);
}

}  // namespace

std::string_view to_string(PoolKind kind) { return kind == PoolKind::Profile ? "profile" : "personality"; }

PoolKind parse_pool_kind(std::string_view text) {
  if (text == "profile") return PoolKind::Profile;
  if (text == "personality") return PoolKind::Personality;
  throw Error(ErrorCode::SchemaViolation, "kind must be 'profile' or 'personality', got '" + std::string(text) + "'");
}

void PoolConfig::validate() const {
  if (!(similarity_threshold > 0.0 && similarity_threshold < 1.0))
    throw Error(ErrorCode::ConfigError, "similarity_threshold must lie in (0, 1)");
  if (batch_size <= 0) throw Error(ErrorCode::ConfigError, "batch_size must be positive");
  if (few_shot_count <= 0) throw Error(ErrorCode::ConfigError, "few_shot_count must be positive");
  if (!(stop_accept_rate >= 0.0 && stop_accept_rate <= 1.0))
    throw Error(ErrorCode::ConfigError, "stop_accept_rate must lie in [0, 1]");
  if (stop_patience <= 0) throw Error(ErrorCode::ConfigError, "stop_patience must be positive");
  if (max_iterations < 0) throw Error(ErrorCode::ConfigError, "max_iterations must be >= 0");
  if (static_cast<int>(seed_entries.size()) < few_shot_count)
    throw Error(ErrorCode::ConfigError, "need at least few_shot_count (" + std::to_string(few_shot_count) +
                                            ") seed entries, got " + std::to_string(seed_entries.size()));
  for (const auto& s : seed_entries) {
    if (trim(s).empty()) throw Error(ErrorCode::ConfigError, "seed entries must be non-empty");
  }
}

std::string Pool::next_id() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", entries_.size() + 1);
  return std::string(to_string(kind_)) + "-" + buf;
}

const PoolEntry& Pool::add_seed(std::string text, gateway::EmbeddingVector embedding) {
  if (text.empty()) throw Error(ErrorCode::InvalidArgument, "pool entry text must be non-empty");
  index_.add(embedding);
  entries_.push_back(PoolEntry{next_id(), kind_, std::move(text), std::move(embedding), 0, -1.0});
  return entries_.back();
}

Admission Pool::admit(std::string text, gateway::EmbeddingVector embedding, int iteration, double threshold) {
  if (text.empty()) throw Error(ErrorCode::InvalidArgument, "candidate must be non-empty");
  const auto best = index_.max_similarity(embedding);
  Admission decision{!best || *best <= threshold, best.value_or(-1.0)};
  if (decision.accepted) {
    index_.add(embedding);
    entries_.push_back(PoolEntry{next_id(), kind_, std::move(text), std::move(embedding), iteration, decision.max_sim});
  }
  return decision;
}

void Pool::restore(PoolEntry entry) {
  if (entry.kind != kind_) throw Error(ErrorCode::SchemaViolation, "entry " + entry.id + " has the wrong kind");
  index_.add(entry.embedding);
  entries_.push_back(std::move(entry));
}

std::vector<std::string> parse_candidates(std::string_view completion, std::size_t limit) {
  std::vector<std::string> out;
  for (auto& line : split_lines(completion)) {
    if (out.size() >= limit) break;
    auto cleaned = strip_list_marker(trim(line));
    if (!cleaned.empty()) out.push_back(std::move(cleaned));
  }
  return out;
}

gateway::RoleTemplate generation_template(const gateway::Gateway& gw, PoolKind kind) {
  if (kind == PoolKind::Profile) return gw.templates().get(gateway::RoleId::PersonaGen);
  return gateway::personality_generation_template();
}

std::vector<std::size_t> few_shot_indices(const PoolConfig& config, std::size_t pool_size, int iteration) {
  const auto k = static_cast<std::size_t>(config.few_shot_count);
  if (pool_size < k)
    throw Error(ErrorCode::InvalidArgument, "pool has " + std::to_string(pool_size) + " entries, need " +
                                                std::to_string(k) + " few-shot examples");
  Rng rng(derive_seed(config.rng_seed, "few-shot/" + std::to_string(iteration)));
  return rng.sample_indices(pool_size, k);
}

std::vector<std::string> generate_candidates(const gateway::Gateway& gw, const Pool& pool, const PoolConfig& config,
                                             int iteration) {
  std::vector<std::string> examples;
  for (std::size_t idx : few_shot_indices(config, pool.size(), iteration)) examples.push_back(pool.entries()[idx].text);
  gateway::Bindings bindings{{std::string(gateway::binding::kSeedExamples), join(examples, "\n")}};
  const std::string completion = gw.complete_with(generation_template(gw, pool.kind()), bindings, {},
                                                  static_cast<std::uint64_t>(iteration));
  auto candidates = parse_candidates(completion, static_cast<std::size_t>(config.batch_size));
  if (candidates.empty())
    throw Error(ErrorCode::ParseFailure, "generation completion for iteration " + std::to_string(iteration) +
                                             " contained no candidates");
  return candidates;
}

Admission admit(const gateway::Gateway& gw, const std::string& candidate, Pool& pool, const PoolConfig& config,
                int iteration) {
  if (candidate.empty()) throw Error(ErrorCode::InvalidArgument, "candidate must be non-empty");
  auto emb = gw.embed({candidate});
  return pool.admit(candidate, std::move(emb.front()), iteration, config.similarity_threshold);
}

BuildResult build_pool(const gateway::Gateway& gw, PoolKind kind, const PoolConfig& config,
                       const std::filesystem::path& checkpoint, const IterationCallback& on_iteration) {
  config.validate();
  BuildResult result{Pool(kind), {}};
  Pool& pool = result.pool;
  try {
    const auto seed_vectors = gw.embed(config.seed_entries);
    for (std::size_t i = 0; i < config.seed_entries.size(); ++i) pool.add_seed(config.seed_entries[i], seed_vectors[i]);

    int low_streak = 0;
    for (int it = 1; it <= config.max_iterations; ++it) {
      auto candidates = generate_candidates(gw, pool, config, it);
      // Embedding is order-independent, so the whole batch goes in one call;
      // admission below stays sequential.
      auto vectors = gw.embed(candidates);
      IterationStats stats{it, static_cast<int>(candidates.size()), 0, 0};
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (pool.admit(candidates[i], std::move(vectors[i]), it, config.similarity_threshold).accepted) ++stats.accepted;
      }
      stats.pool_size = pool.size();
      result.stats.push_back(stats);
      if (on_iteration) on_iteration(stats);
      low_streak = stats.accept_rate() < config.stop_accept_rate ? low_streak + 1 : 0;
      if (low_streak >= config.stop_patience) break;
    }
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::Provider && !checkpoint.empty()) {
      spdlog::warn("{} pool aborted at size {}; checkpointing to {}", to_string(kind), pool.size(), checkpoint.string());
      write_pool(checkpoint, pool);
    }
    throw;
  }
  return result;
}

void write_pool(const std::filesystem::path& path, const Pool& pool) {
  std::vector<json> rows;
  rows.reserve(pool.size());
  for (const auto& e : pool.entries()) {
    rows.push_back({{"id", e.id},
                    {"kind", to_string(e.kind)},
                    {"text", e.text},
                    {"embedding", std::vector<double>(e.embedding.values().begin(), e.embedding.values().end())},
                    {"admitted_at_iteration", e.admitted_at_iteration},
                    {"max_sim_at_admission", e.max_sim_at_admission}});
  }
  write_file_atomic(path, to_jsonl(rows));
}

Pool read_pool(const std::filesystem::path& path, PoolKind kind) {
  Pool pool(kind);
  for (const auto& [lineno, line] : read_nonblank_lines(path)) {
    const std::string where = path.string() + ":" + std::to_string(lineno);
    try {
      json j = json::parse(line);
      PoolEntry e;
      e.id = j.at("id").get<std::string>();
      e.kind = parse_pool_kind(j.at("kind").get<std::string>());
      e.text = j.at("text").get<std::string>();
      if (e.text.empty()) throw Error(ErrorCode::SchemaViolation, "text must be non-empty");
      e.embedding = gateway::EmbeddingVector::unit(j.at("embedding").get<std::vector<double>>());
      e.admitted_at_iteration = j.at("admitted_at_iteration").get<int>();
      e.max_sim_at_admission = j.at("max_sim_at_admission").get<double>();
      pool.restore(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::SchemaViolation, where + ": " + ex.what());
    } catch (const Error& ex) {
      throw Error(ErrorCode::SchemaViolation, where + ": " + ex.what());
    }
  }
  return pool;
}

std::vector<std::string> read_seed_file(const std::filesystem::path& path) {
  std::vector<std::string> out;
  for (const auto& [lineno, line] : read_nonblank_lines(path)) out.push_back(trim(line));
  return out;
}

}  // namespace aloe::persona
