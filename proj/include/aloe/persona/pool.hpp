#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aloe/gateway/gateway.hpp"
#include "aloe/gateway/similarity.hpp"
#include "aloe/gateway/types.hpp"

namespace aloe::persona {

enum class PoolKind { Profile, Personality };

std::string_view to_string(PoolKind kind);
PoolKind parse_pool_kind(std::string_view text);

struct PoolEntry {
  std::string id;
  PoolKind kind = PoolKind::Profile;
  std::string text;
  gateway::EmbeddingVector embedding;
  int admitted_at_iteration = 0;
  // -1 for seed entries.
  double max_sim_at_admission = -1.0;
};

struct PoolConfig {
  double similarity_threshold = 0.6;
  int batch_size = 20;
  int few_shot_count = 5;
  std::vector<std::string> seed_entries;
  double stop_accept_rate = 0.10;
  int stop_patience = 3;
  int max_iterations = 100;
  std::uint64_t rng_seed = 0;

  // Throws ConfigError on out-of-range fields or too few seeds.
  void validate() const;
};

struct Admission {
  bool accepted = false;
  // -1 when the pool was empty.
  double max_sim = -1.0;
};

struct IterationStats {
  int iteration = 0;
  int generated = 0;
  int accepted = 0;
  std::size_t pool_size = 0;

  double accept_rate() const { return generated == 0 ? 0.0 : static_cast<double>(accepted) / generated; }
};

// Entries of one kind plus a similarity index over their embeddings.
// Admission is order-dependent: each candidate is compared with everything
// admitted before it, including earlier candidates of the same batch.
class Pool {
 public:
  explicit Pool(PoolKind kind) : kind_(kind) {}

  PoolKind kind() const noexcept { return kind_; }
  const std::vector<PoolEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  // Seeds skip the similarity check and record max_sim = -1.
  const PoolEntry& add_seed(std::string text, gateway::EmbeddingVector embedding);

  // Accepted iff the pool is empty or max cosine <= threshold (a tie with
  // the threshold is accepted). Accepted candidates are stored.
  Admission admit(std::string text, gateway::EmbeddingVector embedding, int iteration, double threshold);

  // Restores an entry read from disk verbatim.
  void restore(PoolEntry entry);

 private:
  std::string next_id() const;

  PoolKind kind_;
  std::vector<PoolEntry> entries_;
  gateway::SimilarityIndex index_;
};

// One description per non-blank line; list markers such as "1." or "-" are
// stripped. At most `limit` entries.
std::vector<std::string> parse_candidates(std::string_view completion, std::size_t limit);

// The generation template for a kind.
gateway::RoleTemplate generation_template(const gateway::Gateway& gw, PoolKind kind);

// One completion's worth of candidates. Few-shot exemplars are drawn
// uniformly without replacement from a stream derived from
// (rng_seed, iteration). Throws ParseFailure when nothing parses.
std::vector<std::string> generate_candidates(const gateway::Gateway& gw, const Pool& pool, const PoolConfig& config,
                                             int iteration);

// Few-shot indices used by generate_candidates for an iteration.
std::vector<std::size_t> few_shot_indices(const PoolConfig& config, std::size_t pool_size, int iteration);

// Embeds the candidate and admits it against the pool.
Admission admit(const gateway::Gateway& gw, const std::string& candidate, Pool& pool, const PoolConfig& config,
                int iteration);

struct BuildResult {
  Pool pool;
  std::vector<IterationStats> stats;
};

using IterationCallback = std::function<void(const IterationStats&)>;

// Seeds, then generate -> embed -> admit until the accept rate stays below
// stop_accept_rate for stop_patience consecutive iterations or
// max_iterations is reached. A provider failure writes the pool so far to
// `checkpoint` (if non-empty) before rethrowing.
BuildResult build_pool(const gateway::Gateway& gw, PoolKind kind, const PoolConfig& config,
                       const std::filesystem::path& checkpoint = {}, const IterationCallback& on_iteration = {});

void write_pool(const std::filesystem::path& path, const Pool& pool);
Pool read_pool(const std::filesystem::path& path, PoolKind kind);

// Plain text, one description per non-blank line.
std::vector<std::string> read_seed_file(const std::filesystem::path& path);

}  // namespace aloe::persona
