#pragma once

#include <cstdint>
#include <random>

namespace xdeval {

// Deterministic random source. Distribution sampling is implemented here
// rather than through std::*_distribution so streams are reproducible across
// standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Standard normal via Box-Muller; the paired draw is cached.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 step, used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Combine a base seed with a stream tag into a new seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace xdeval
