#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "aloe/persona/pool.hpp"

namespace aloe::persona {

// A (profile, personality) pairing. Texts are copied in so personas files
// stand alone without the pools.
struct Persona {
  std::string persona_id;
  std::string profile_id;
  std::string profile_text;
  std::string personality_id;
  std::string personality_text;

  bool operator==(const Persona&) const = default;
};

// `count` distinct (profile, personality) pairs drawn uniformly without
// replacement from the cross product. Deterministic for a fixed seed.
// Throws CountExceedsCross when count > |profiles| x |personalities|.
std::vector<Persona> assemble_personas(std::span<const PoolEntry> profiles, std::span<const PoolEntry> personalities,
                                       std::size_t count, std::uint64_t rng_seed);

void write_personas(const std::filesystem::path& path, const std::vector<Persona>& personas);
std::vector<Persona> read_personas(const std::filesystem::path& path);

}  // namespace aloe::persona
