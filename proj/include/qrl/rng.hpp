#pragma once

#include <cstdint>
#include <random>

namespace qrl {

// Deterministic seedable generator with cheap derived streams.
//
// Every stochastic operation in the library takes an Rng& explicitly, and
// independent components (grid points, evaluation episodes, noise channels)
// draw from child streams derived from the construction seed, so runs are
// replayable and parallel execution cannot perturb results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n). Rejection-free modulo of a 64-bit draw; the
  // bias is < 2^-32 for the small n used here.
  std::uint32_t uniform_int(std::uint32_t n) {
    return static_cast<std::uint32_t>(engine_() % n);
  }

  // Uniform float in [-scale, scale), used for weight initialization.
  float uniform_symmetric(float scale) {
    return scale * (2.0f * static_cast<float>(uniform()) - 1.0f);
  }

  // Independent stream derived from the construction seed (not from the
  // current engine state), so child identity is stable no matter how much
  // the parent has been consumed.
  Rng child(std::uint64_t stream) const {
    return Rng(splitmix64(seed_ ^ (0x9e3779b97f4a7c15ULL * (stream + 1))));
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace qrl
