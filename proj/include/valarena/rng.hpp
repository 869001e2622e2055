#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace valarena {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Trials draw their seeds from the experiment seed by hashing, so any subset
// of trial indices can run in any order (or in parallel) with identical
// results.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t trial_index) {
  return splitmix64(splitmix64(base_seed) ^ splitmix64(trial_index + 0x51ED2701A3F45B2DULL));
}

// Deterministic random stream for one trial. Exactly one double in [0, 1) is
// consumed per decision node visited, in path order, so traces are
// reproducible from (base seed, trial index) alone.
class TrialRng {
 public:
  explicit TrialRng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Samples an index from a probability vector; trailing slack from rounding
  // goes to the last entry.
  int sample(const std::vector<double>& probs) {
    double u = uniform01();
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
      acc += probs[k];
      if (u < acc) return static_cast<int>(k);
    }
    return static_cast<int>(probs.size()) - 1;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace valarena
