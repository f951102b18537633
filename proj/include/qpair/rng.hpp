#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qpair {

// All stochastic code derives its engine from an explicit base seed plus a
// hierarchical path (command, stage, record index, trial index, ...).  Two
// runs with the same seed produce the same counts regardless of scheduling,
// because every record/trial owns an independent derived stream.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = base;
  std::uint64_t h = splitmix64(s);
  for (std::uint64_t p : path) {
    s = h ^ (p + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    h = splitmix64(s);
  }
  return h;
}

inline std::mt19937_64 engine_for(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  return std::mt19937_64(derive_seed(base, path));
}

inline long long poisson_draw(std::mt19937_64& eng, double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<long long> dist(mean);
  return dist(eng);
}

}  // namespace qpair
