#pragma once

#include <cstdint>
#include <random>

namespace bayesnam {

// Deterministic random source. Every stochastic operation in the library
// draws from an Rng so that a run is reproducible from its seed alone.
// The raw engine is mt19937_64 (its output sequence is fixed by the
// standard); the real-valued transforms below are our own so that streams
// are bit-identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * kInv53;
  }

  // Standard normal (Box-Muller). One fresh value per call; pairs are
  // generated together and the spare is cached.
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t next_u64() { return gen_(); }

  // Derives an independent stream seed from (seed, stream); splitmix64
  // finalizer so that nearby inputs map to unrelated outputs.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  static constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bayesnam
