#pragma once

#include <cstdint>
#include <random>

namespace mrf {

// Stable tags for deriving independent RNG substreams.  Every stochastic
// operation draws from a substream keyed by (purpose, index) so that results
// depend only on the master seed and the work being done, never on thread
// scheduling or worker count.
enum class RngPurpose : std::uint64_t {
  InitPopulation = 1,
  SaProposal = 2,
  GaStep = 3,
  LsDiversify = 5,
  SimulatedEvolution = 6,
  Calibration = 7,
  DecoySynthesis = 8,
  Testing = 99,
};

// splitmix64: the standard 64-bit finalizer-based generator, used here only
// to spread (seed, purpose, index) into well-separated engine seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class RandomSource {
 public:
  explicit RandomSource(std::uint64_t master_seed) : master_(master_seed) {}

  std::uint64_t master_seed() const { return master_; }

  // Deterministic engine for the given (purpose, index) slot.
  std::mt19937_64 stream(RngPurpose purpose, std::uint64_t index) const {
    std::uint64_t state = master_;
    std::uint64_t mixed = splitmix64(state);
    state ^= static_cast<std::uint64_t>(purpose) * 0xd1342543de82ef95ULL;
    mixed ^= splitmix64(state);
    state ^= index * 0xaf251af3b0f025b5ULL;
    mixed ^= splitmix64(state);
    return std::mt19937_64(mixed);
  }

 private:
  std::uint64_t master_;
};

// Thin wrappers so every call site uses the same (well-defined) distribution
// implementations.  libstdc++'s uniform_int_distribution is deterministic for
// a fixed libstdc++, which is all the reproducibility contract requires.
inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  std::uniform_int_distribution<int> dist(lo, hi);
  return dist(rng);
}

inline double uniform_real(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

}  // namespace mrf
