#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "valarena/game.hpp"

namespace valarena {

// A valuation assigns one real to each move of a single player, stored
// parallel to GameTree::moves_of(player).
class Valuation {
 public:
  Valuation(const GameTree& g, PlayerId player, double constant = 0.0);
  // Explicit per-move values keyed by move label path ("L", "L/a", ...). The
  // map must cover the player's moves exactly.
  Valuation(const GameTree& g, PlayerId player, const std::map<std::string, double>& by_path);

  PlayerId player() const { return player_; }
  double at(const GameTree& g, NodeId move) const;
  void set(const GameTree& g, NodeId move, double value);
  const std::vector<double>& values() const { return values_; }

  bool operator==(const Valuation& o) const {
    return player_ == o.player_ && values_ == o.values_;
  }

 private:
  PlayerId player_;
  std::vector<double> values_;
};

// Running per-move observation sums and counts on top of fallback initial
// values: a move's current value is its observation mean once observed, its
// initial value before that.
class AveragingState {
 public:
  explicit AveragingState(Valuation initial);

  PlayerId player() const { return initial_.player(); }
  double current(const GameTree& g, NodeId move) const;
  long long count(const GameTree& g, NodeId move) const;
  void observe(const GameTree& g, NodeId move, double payoff);
  Valuation current_valuation(const GameTree& g) const;

  bool operator==(const AveragingState& o) const {
    return initial_ == o.initial_ && sums_ == o.sums_ && counts_ == o.counts_;
  }

 private:
  Valuation initial_;
  std::vector<double> sums_;
  std::vector<long long> counts_;
};

enum class StrategyRuleKind { kMyopic, kExploratory };
enum class RevisionRuleKind { kMemoryless, kAveraging };

struct StrategyRule {
  StrategyRuleKind kind = StrategyRuleKind::kMyopic;
  double delta = 0.0;  // exploration weight, used by kExploratory
};

struct InitialValuation {
  bool explicit_map = false;
  double constant = 0.0;
  std::map<std::string, double> by_path;  // used when explicit_map
};

struct LearnerConfig {
  PlayerId player = 1;
  StrategyRule strategy_rule;
  RevisionRuleKind revision_rule = RevisionRuleKind::kMemoryless;
  InitialValuation initial;
};

// Uniform distribution over the moves maximizing v at decision node n
// (probability 1/k on each of the k argmax children, 0 elsewhere).
std::vector<double> myopic_distribution(const GameTree& g, const Valuation& v, NodeId n);

// (1 - delta) * myopic + delta * uniform; delta must lie in [0, 1]. Every
// move keeps probability at least delta / |moves|.
std::vector<double> exploratory_distribution(const GameTree& g, const Valuation& v, NodeId n,
                                             double delta);

// Overwrites the value of each of v's owner's moves on the path with the
// round payoff; all other moves are untouched.
Valuation memoryless_revise(const GameTree& g, Valuation v, const PathRecord& path, double payoff);

// Adds one observation of the round payoff to each of the owner's moves on
// the path.
AveragingState averaging_revise(const GameTree& g, AveragingState s, const PathRecord& path,
                                double payoff);

Valuation make_initial_valuation(const GameTree& g, PlayerId player, const InitialValuation& init);

// One player's evolving state across the rounds of a trial.
class LearnerState {
 public:
  LearnerState(const GameTree& g, const LearnerConfig& cfg);

  const LearnerConfig& config() const { return cfg_; }
  const Valuation& current_valuation() const { return current_; }
  long long observation_count(const GameTree& g, NodeId move) const;

  // Writes the strategy-rule distribution at decision node n into out.
  void fill_distribution(const GameTree& g, NodeId n, std::vector<double>& out) const;
  void observe(const GameTree& g, const PathRecord& path, double payoff);

 private:
  LearnerConfig cfg_;
  Valuation current_;
  std::optional<AveragingState> averaging_;
};

}  // namespace valarena
