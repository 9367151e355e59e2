#pragma once

#include <cstdint>
#include <random>

namespace markovgate {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Key of an independent stream; distinct (seed, path, coordinate) triples
/// give unrelated engine states.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t path_id,
                                   std::uint64_t coordinate) {
  return mix64(mix64(mix64(seed) ^ path_id) ^ (coordinate * 0xd1b54a32d192ed03ULL));
}

/// Random coordinates of a simulated path.
enum class Coordinate : std::uint64_t {
  diffusion = 0,
  latent = 1,
  jump_arrival = 2,
  jump_size = 3,
  initial = 4,
  bootstrap_innovation = 5,
  bootstrap_initial = 6,
};

/// A reproducible random stream keyed by (seed, path id, coordinate). Paths
/// generated in parallel draw from disjoint streams, so results do not
/// depend on scheduling.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t path_id, Coordinate coordinate)
      : engine_(stream_key(seed, path_id, static_cast<std::uint64_t>(coordinate))) {}

  double normal() { return normal_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  std::uint64_t poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(engine_);
  }
  std::size_t index_below(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Seed of a derived sub-experiment (replicate, grid cell, ...).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return mix64(mix64(seed ^ 0x5851f42d4c957f2dULL) + mix64(a) * 3 + b);
}

}  // namespace markovgate
