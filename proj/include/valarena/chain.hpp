#pragma once

#include <map>
#include <string>
#include <vector>

#include "valarena/arena.hpp"
#include "valarena/game.hpp"
#include "valarena/learning.hpp"
#include "valarena/rational.hpp"

namespace valarena {

// All payoff-revision dynamics with one memoryless learner against fixed
// (uniform or stationary) opponents form a finite Markov chain over the
// learner's reachable valuations. The chain is exact: transition entries are
// produced in the scalar type S (double, or Rat for exact rationals).
template <typename S>
struct BasicChain {
  PlayerId learner = 1;
  // Valuation per state, parallel to GameTree::moves_of(learner).
  std::vector<std::vector<double>> states;
  // Human-readable per-state labels: "movepath=value" pairs sorted by path.
  std::vector<std::string> labels;
  std::vector<std::vector<S>> rows;  // row-stochastic transition matrix
  std::vector<S> expected_payoff;    // learner's expected round payoff per state
  std::vector<int> absorbing;        // state indices with a unit self-loop
  int initial_state = 0;
};

using Chain = BasicChain<double>;
using RationalChain = BasicChain<Rat>;

struct ChainOptions {
  long long state_cap = 1'000'000;  // enumeration safety limit
  // Dense matrices are quadratic in the state count; building one past this
  // size is refused rather than exhausting memory.
  long long matrix_cap = 8192;
};

// The reachable valuation states alone (no matrix). `players` must contain
// exactly one learner with memoryless revision; every other player must be
// uniform or stationary. Throws ChainError when state_cap is exceeded and
// ValidationError for history-dependent opponents or an averaging learner.
std::vector<std::vector<double>> enumerate_states(const GameTree& g,
                                                  const std::vector<PlayerSpec>& players,
                                                  const ChainOptions& opt = {});

// Numeric chain; the exploratory learner's delta is read from its config.
Chain build_chain(const GameTree& g, const std::vector<PlayerSpec>& players,
                  const ChainOptions& opt = {});

// Exact chain; `delta` replaces the learner's exploration weight so it can be
// an exact rational (stationary opponent probabilities convert exactly from
// their double representations).
RationalChain build_chain_exact(const GameTree& g, const std::vector<PlayerSpec>& players,
                                const Rat& delta, const ChainOptions& opt = {});

// Probability of ending in each absorbing state starting from `from`
// (keyed by state index). Throws ChainError when there is no absorbing state
// or the linear system is singular (some mass never gets absorbed).
template <typename S>
std::map<int, S> absorption_probabilities(const BasicChain<S>& chain, int from);

// Unique stationary distribution of an irreducible chain; throws ChainError
// when the chain is reducible.
template <typename S>
std::vector<S> stationary_distribution(const BasicChain<S>& chain);

template <typename S>
S expected_stationary_payoff(const BasicChain<S>& chain);

Chain to_numeric(const RationalChain& chain);

// Value tuples per state restricted to the given move label paths, in state
// order (used to compare against a hand-computed projection).
std::vector<std::vector<double>> project_states(const GameTree& g, PlayerId learner,
                                                const std::vector<std::vector<double>>& states,
                                                const std::vector<std::string>& move_paths);

}  // namespace valarena
