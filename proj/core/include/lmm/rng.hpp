#pragma once

#include <cstdint>
#include <random>

namespace lmm {

/// SplitMix64 finalizer; mixes (seed, stream) into independent 64-bit seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Generator for replicate `stream` of a run seeded with `seed`. Streams are
/// independent of how replicates are distributed over workers.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)));
}

/// Standard normal draws by inversion of a 53-bit uniform. Unlike
/// std::normal_distribution, the sequence is fixed by the C++ standard's
/// definition of mt19937_64 alone.
class NormalStream {
 public:
  explicit NormalStream(std::mt19937_64 gen) : gen_(gen) {}
  double operator()();

 private:
  std::mt19937_64 gen_;
};

}  // namespace lmm
