#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "aloe/gateway/types.hpp"
#include "aloe/persona/pool.hpp"

namespace aloe::cli {

struct PoolSettings {
  persona::PoolConfig config;
  std::filesystem::path seed_file;
};

struct BuildSettings {
  int max_turns = 10;
  int parallelism = 4;
  // 0 = every persona in the personas file.
  std::size_t persona_limit = 0;
};

struct EvalSettings {
  int max_turns = 10;
  int parallelism = 4;
  std::filesystem::path cases = "data/eval/sample_cases.jsonl";
  std::string model_label = "model";
  gateway::Sampling sampling{0.7, 512};
};

struct Paths {
  std::filesystem::path pools = "out/pools";
  std::filesystem::path personas = "out/personas.jsonl";
  std::filesystem::path dataset = "out/dataset.jsonl";
  std::filesystem::path exports = "out/exports";
  std::filesystem::path runs = "out/runs";
};

struct AppConfig {
  std::map<gateway::RoleId, gateway::ProviderConfig> providers;
  gateway::ProviderConfig embedding;
  gateway::ProviderConfig evaluated;
  PoolSettings profile_pool;
  PoolSettings personality_pool;
  std::size_t persona_count = 100;
  BuildSettings build;
  EvalSettings eval;
  Paths paths;
  std::filesystem::path agent_mix;
  std::uint64_t global_seed = 0;

  // Mock backends everywhere, seed files under data/seeds.
  static AppConfig defaults();

  // Throws ConfigError for a missing role, invalid provider, or invalid
  // pool/build/eval settings.
  void validate() const;

  // Points every provider at one backend kind.
  void set_backend(gateway::BackendKind kind);

  // Namespaced stream of global_seed; each command draws its own.
  std::uint64_t seed_for(std::string_view name) const;
};

// Fields present in `doc` override the defaults. Provider sections inherit
// from "providers.default". Unknown keys and inline API keys are rejected
// with ConfigError.
AppConfig config_from_json(const nlohmann::json& doc);
AppConfig load_config(const std::filesystem::path& path);

}  // namespace aloe::cli
