#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace aloe {

// FNV-1a over the bytes followed by a splitmix64 finalizer. Stable across
// platforms and runs; never use std::hash for anything that is persisted.
std::uint64_t stable_hash(std::string_view bytes, std::uint64_t salt = 0);

std::uint64_t mix64(std::uint64_t x);

// Namespaced seed derivation: derive_seed(global, "conversation/p-0001").
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name);

// Seeded stream with portable sampling helpers. std::mt19937_64 output is
// fixed by the standard; the std distributions are not, so sampling is done
// here instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform real in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool coin() { return (next() >> 63) != 0; }

  // k distinct indices from [0, n), uniform without replacement, in draw order.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace aloe
