#include "aloe/cli/config.hpp"

#include <set>

#include "aloe/common/error.hpp"
#include "aloe/common/jsonl.hpp"
#include "aloe/common/random.hpp"

namespace aloe::cli {

namespace {

using gateway::ProviderConfig;
using gateway::RoleId;

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw Error(ErrorCode::ConfigError, where + " must be an object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw Error(ErrorCode::ConfigError, "unknown key " + where + "." + key);
  }
}

template <typename T>
void read_into(const json& obj, const char* key, T& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::ConfigError, where + "." + key + " has the wrong type");
  }
}

void read_path(const json& obj, const char* key, std::filesystem::path& out, const std::string& where) {
  std::string s = out.string();
  read_into(obj, key, s, where);
  out = s;
}

ProviderConfig provider_from(const json& obj, ProviderConfig base, const std::string& where) {
  if (obj.contains("api_key"))
    throw Error(ErrorCode::ConfigError, where + ".api_key is not allowed; name an environment variable in api_key_env");
  reject_unknown(obj, where, {"base_url", "model_name", "api_key_env", "max_retries", "requests_per_minute", "backend"});
  read_into(obj, "base_url", base.base_url, where);
  read_into(obj, "model_name", base.model_name, where);
  read_into(obj, "api_key_env", base.api_key_env, where);
  read_into(obj, "max_retries", base.max_retries, where);
  read_into(obj, "requests_per_minute", base.requests_per_minute, where);
  if (obj.contains("backend")) {
    std::string kind;
    read_into(obj, "backend", kind, where);
    try {
      base.backend = gateway::parse_backend_kind(kind);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, where + ".backend: " + e.what());
    }
  }
  return base;
}

void pool_from(const json& obj, PoolSettings& pool, const std::string& where) {
  reject_unknown(obj, where,
                 {"seed_file", "similarity_threshold", "batch_size", "few_shot_count", "stop_accept_rate",
                  "stop_patience", "max_iterations"});
  read_path(obj, "seed_file", pool.seed_file, where);
  read_into(obj, "similarity_threshold", pool.config.similarity_threshold, where);
  read_into(obj, "batch_size", pool.config.batch_size, where);
  read_into(obj, "few_shot_count", pool.config.few_shot_count, where);
  read_into(obj, "stop_accept_rate", pool.config.stop_accept_rate, where);
  read_into(obj, "stop_patience", pool.config.stop_patience, where);
  read_into(obj, "max_iterations", pool.config.max_iterations, where);
}

void check_pool_settings(const persona::PoolConfig& c, const std::string& where) {
  // Seeds arrive later from the seed file; everything else is checkable now.
  auto probe = c;
  probe.seed_entries.assign(static_cast<std::size_t>(std::max(probe.few_shot_count, 1)), "seed");
  try {
    probe.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, where + ": " + e.what());
  }
}

}  // namespace

AppConfig AppConfig::defaults() {
  AppConfig c;
  for (RoleId r : gateway::kAllRoles) c.providers[r] = ProviderConfig{};
  c.profile_pool.seed_file = "data/seeds/profiles.txt";
  c.personality_pool.seed_file = "data/seeds/personalities.txt";
  return c;
}

void AppConfig::validate() const {
  for (RoleId r : gateway::kAllRoles) {
    auto it = providers.find(r);
    if (it == providers.end())
      throw Error(ErrorCode::ConfigError, "no provider for role " + std::string(gateway::to_string(r)));
    it->second.validate();
  }
  embedding.validate();
  evaluated.validate();
  check_pool_settings(profile_pool.config, "pool.profile");
  check_pool_settings(personality_pool.config, "pool.personality");
  if (persona_count == 0) throw Error(ErrorCode::ConfigError, "pool.persona_count must be positive");
  if (build.max_turns < 1) throw Error(ErrorCode::ConfigError, "build.max_turns must be >= 1");
  if (build.parallelism < 1) throw Error(ErrorCode::ConfigError, "build.parallelism must be >= 1");
  if (eval.max_turns < 2) throw Error(ErrorCode::ConfigError, "eval.max_turns must be >= 2");
  if (eval.parallelism < 1) throw Error(ErrorCode::ConfigError, "eval.parallelism must be >= 1");
}

void AppConfig::set_backend(gateway::BackendKind kind) {
  for (auto& [_, p] : providers) p.backend = kind;
  embedding.backend = kind;
  evaluated.backend = kind;
}

std::uint64_t AppConfig::seed_for(std::string_view name) const { return derive_seed(global_seed, name); }

AppConfig config_from_json(const json& doc) {
  AppConfig c = AppConfig::defaults();
  reject_unknown(doc, "config", {"global_seed", "providers", "pool", "build", "eval", "paths", "agent_mix"});
  read_into(doc, "global_seed", c.global_seed, "config");
  read_path(doc, "agent_mix", c.agent_mix, "config");

  if (auto it = doc.find("providers"); it != doc.end()) {
    const json& providers = *it;
    if (!providers.is_object()) throw Error(ErrorCode::ConfigError, "providers must be an object");
    ProviderConfig base;
    if (providers.contains("default")) base = provider_from(providers["default"], base, "providers.default");
    for (RoleId r : gateway::kAllRoles) c.providers[r] = base;
    c.embedding = base;
    c.evaluated = base;
    for (const auto& [key, value] : providers.items()) {
      const std::string where = "providers." + key;
      if (key == "default") continue;
      if (key == "embedding") c.embedding = provider_from(value, base, where);
      else if (key == "evaluated") c.evaluated = provider_from(value, base, where);
      else {
        RoleId role;
        try {
          role = gateway::parse_role_id(key);
        } catch (const Error&) {
          throw Error(ErrorCode::ConfigError, "unknown provider section " + where);
        }
        c.providers[role] = provider_from(value, base, where);
      }
    }
  }

  if (auto it = doc.find("pool"); it != doc.end()) {
    reject_unknown(*it, "pool", {"profile", "personality", "persona_count"});
    if (it->contains("profile")) pool_from((*it)["profile"], c.profile_pool, "pool.profile");
    if (it->contains("personality")) pool_from((*it)["personality"], c.personality_pool, "pool.personality");
    read_into(*it, "persona_count", c.persona_count, "pool");
  }
  if (auto it = doc.find("build"); it != doc.end()) {
    reject_unknown(*it, "build", {"max_turns", "parallelism", "persona_limit"});
    read_into(*it, "max_turns", c.build.max_turns, "build");
    read_into(*it, "parallelism", c.build.parallelism, "build");
    read_into(*it, "persona_limit", c.build.persona_limit, "build");
  }
  if (auto it = doc.find("eval"); it != doc.end()) {
    reject_unknown(*it, "eval", {"max_turns", "parallelism", "cases", "model_label", "temperature", "max_tokens"});
    read_into(*it, "max_turns", c.eval.max_turns, "eval");
    read_into(*it, "parallelism", c.eval.parallelism, "eval");
    read_path(*it, "cases", c.eval.cases, "eval");
    read_into(*it, "model_label", c.eval.model_label, "eval");
    read_into(*it, "temperature", c.eval.sampling.temperature, "eval");
    read_into(*it, "max_tokens", c.eval.sampling.max_tokens, "eval");
  }
  if (auto it = doc.find("paths"); it != doc.end()) {
    reject_unknown(*it, "paths", {"pools", "personas", "dataset", "exports", "runs"});
    read_path(*it, "pools", c.paths.pools, "paths");
    read_path(*it, "personas", c.paths.personas, "paths");
    read_path(*it, "dataset", c.paths.dataset, "paths");
    read_path(*it, "exports", c.paths.exports, "paths");
    read_path(*it, "runs", c.paths.runs, "paths");
  }
  c.validate();
  return c;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::ConfigError, path.string() + " is not valid JSON");
  return config_from_json(doc);
}

}  // namespace aloe::cli
