#include "aloe/persona/persona.hpp"

#include <cstdio>
#include <set>

#include "aloe/common/error.hpp"
#include "aloe/common/jsonl.hpp"
#include "aloe/common/random.hpp"

namespace aloe::persona {

std::vector<Persona> assemble_personas(std::span<const PoolEntry> profiles, std::span<const PoolEntry> personalities,
                                       std::size_t count, std::uint64_t rng_seed) {
  const std::size_t cross = profiles.size() * personalities.size();
  if (count > cross)
    throw Error(ErrorCode::CountExceedsCross, "requested " + std::to_string(count) + " personas but only " +
                                                  std::to_string(profiles.size()) + " x " +
                                                  std::to_string(personalities.size()) + " = " +
                                                  std::to_string(cross) + " distinct pairs exist");
  Rng rng(rng_seed);
  std::vector<Persona> out;
  out.reserve(count);
  const int width = count >= 100000 ? static_cast<int>(std::to_string(count).size()) : 5;
  for (std::size_t cell : rng.sample_indices(cross, count)) {
    const PoolEntry& p = profiles[cell / personalities.size()];
    const PoolEntry& q = personalities[cell % personalities.size()];
    char id[32];
    std::snprintf(id, sizeof id, "persona-%0*zu", width, out.size() + 1);
    out.push_back(Persona{id, p.id, p.text, q.id, q.text});
  }
  return out;
}

void write_personas(const std::filesystem::path& path, const std::vector<Persona>& personas) {
  std::vector<json> rows;
  rows.reserve(personas.size());
  for (const auto& p : personas) {
    rows.push_back({{"persona_id", p.persona_id},
                    {"profile_text", p.profile_text},
                    {"personality_text", p.personality_text},
                    {"profile_id", p.profile_id},
                    {"personality_id", p.personality_id}});
  }
  write_file_atomic(path, to_jsonl(rows));
}

std::vector<Persona> read_personas(const std::filesystem::path& path) {
  std::vector<Persona> out;
  std::set<std::string> ids;
  for (const auto& [lineno, line] : read_nonblank_lines(path)) {
    const std::string where = path.string() + ":" + std::to_string(lineno);
    try {
      json j = json::parse(line);
      Persona p{j.at("persona_id").get<std::string>(), j.at("profile_id").get<std::string>(),
                j.at("profile_text").get<std::string>(), j.at("personality_id").get<std::string>(),
                j.at("personality_text").get<std::string>()};
      if (p.persona_id.empty() || p.profile_text.empty() || p.personality_text.empty())
        throw Error(ErrorCode::SchemaViolation, where + ": persona fields must be non-empty");
      if (!ids.insert(p.persona_id).second)
        throw Error(ErrorCode::SchemaViolation, where + ": duplicate persona_id " + p.persona_id);
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::SchemaViolation, where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace aloe::persona
