#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace semtrig {

// Portable seeded draws. The standard distributions and std::shuffle are
// implementation-defined, so every draw here goes through raw mt19937_64
// output with explicit rejection sampling.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Fisher-Yates over the whole range.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

private:
  std::mt19937_64 engine_;
};

// n distinct indices out of [0, population) by partial Fisher-Yates, in draw order.
std::vector<std::size_t> sample_indices(std::size_t population, std::size_t n, std::uint64_t seed);

std::uint64_t fnv1a64(std::string_view s);
std::uint64_t splitmix64(std::uint64_t x);

// Seed for a per-item stream, e.g. one BadNet-R placement per sample id.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

}  // namespace semtrig
