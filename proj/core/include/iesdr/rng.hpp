#pragma once

#include <cstdint>
#include <random>

namespace iesdr {

// splitmix64; used to derive independent seeds for named RNG streams so that
// adding a consumer does not shift the draws of the others.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return std::mt19937_64(split_seed(seed, stream));
}

inline double uniform01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double normal(std::mt19937_64& rng, double mean, double std_dev) {
  return std::normal_distribution<double>(mean, std_dev)(rng);
}

}  // namespace iesdr
