#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "valarena/game.hpp"
#include "valarena/learning.hpp"
#include "valarena/rng.hpp"
#include "valarena/solvers.hpp"

namespace valarena {

// Per-node distributions over children for one player; empty vectors at
// nodes the player does not own.
struct BehavioralStrategy {
  PlayerId player = 0;
  std::vector<std::vector<double>> dist;  // indexed by node id
};

struct UniformPolicy {};

struct StationaryPolicy {
  BehavioralStrategy strategy;
};

// Cycles through a fixed list of pure strategies, one per round.
struct ScriptedPolicy {
  std::vector<PureStrategy> sequence;
};

// Recomputes each round the pure strategy minimizing the learner's expected
// payoff against the learner's declared mixed strategy for that round.
struct AdversarialPolicy {};

using PlayerSpec =
    std::variant<LearnerConfig, UniformPolicy, StationaryPolicy, ScriptedPolicy, AdversarialPolicy>;

struct SpeCheckConfig {
  double tolerance = 0.03;
  long long min_visits = 50;
};

struct ExperimentConfig {
  std::shared_ptr<const GameTree> game;
  std::string game_path;  // as written in the config file, echoed in reports
  std::vector<PlayerSpec> players;
  long long rounds = 0;
  long long trials = 1;
  std::uint64_t base_seed = 0;
  long long tail_window = 0;  // 0 means the default, max(100, rounds / 5)
  double epsilon = 0.5;
  std::optional<double> delta_override;  // replaces every exploratory learner's delta
  std::optional<PlayerId> maxmin_player;
  std::optional<SpeCheckConfig> spe_check;
  std::string suite;
  int jobs = 0;  // 0 means hardware concurrency
  bool dump_state = false;

  long long effective_window() const;
  // Applies delta_override to the learners and materializes defaults.
  void normalize();
  void validate() const;  // throws ValidationError
};

struct LearnerSnapshotMove {
  std::string path;
  double value = 0;
  long long count = 0;  // observation count; 0 under memoryless revision
  bool operator==(const LearnerSnapshotMove& o) const {
    return path == o.path && value == o.value && count == o.count;
  }
};

struct LearnerSnapshot {
  PlayerId player = 0;
  RevisionRuleKind revision = RevisionRuleKind::kMemoryless;
  std::vector<LearnerSnapshotMove> moves;
  bool operator==(const LearnerSnapshot& o) const {
    return player == o.player && revision == o.revision && moves == o.moves;
  }
};

struct TailChoiceCounts {
  long long visits = 0;
  std::vector<long long> counts;  // per child of the node
  bool operator==(const TailChoiceCounts& o) const {
    return visits == o.visits && counts == o.counts;
  }
};

// Everything recorded about one trial.
struct TrialRecord {
  std::uint64_t seed = 0;
  long long rounds = 0;
  long long tail_window = 0;
  std::vector<NodeId> terminals;                  // terminal reached per round
  std::vector<std::vector<double>> payoffs;       // [player][round]
  std::vector<std::vector<double>> running_mean;  // [player][round], cumulative mean
  std::vector<double> tail_mean;                  // per player, mean over the tail window
  std::vector<char> tail_all_win;                 // per player: payoff 1 throughout the tail
  bool tail_single_terminal = false;
  NodeId tail_modal_terminal = kNoNode;
  double tail_modal_share = 0;
  std::map<NodeId, TailChoiceCounts> tail_choices;  // per decision node over the tail
  std::vector<LearnerSnapshot> final_states;

  bool operator==(const TrialRecord& o) const;
};

// Per-decision-node distributions for one round, indexed by node id; entries
// at terminals stay empty.
using RoundStrategies = std::vector<std::vector<double>>;

// Samples one path from the root, consuming one uniform draw per decision
// node visited. A bare-terminal game consumes nothing.
PathRecord play_round(const GameTree& g, const RoundStrategies& profile, TrialRng& rng);

// Pure strategy for all non-learner nodes minimizing the learner's expected
// payoff against the learner's declared behavioral strategy; nodes the
// declared strategy never reaches still minimize their own subtree value.
// Ties break toward the lowest move index.
PureStrategy adversarial_response(const GameTree& g, PlayerId learner,
                                  const BehavioralStrategy& declared);

TrialRecord run_trial(const ExperimentConfig& cfg, long long trial_index);

struct Quantiles {
  double min = 0, p05 = 0, p25 = 0, median = 0, mean = 0, p75 = 0, p95 = 0, max = 0;
};

Quantiles summarize_quantiles(std::vector<double> values);

struct NodeChoiceSummary {
  long long visits = 0;
  std::vector<double> freq;  // per child, pooled over trials
};

struct ExperimentReport {
  long long trials = 0;
  long long rounds = 0;
  long long tail_window = 0;
  std::vector<double> all_win_tail_fraction;  // per player
  double single_terminal_tail_fraction = 0;
  std::vector<Quantiles> tail_mean;  // per player
  std::map<std::string, NodeChoiceSummary> tail_choice_freq;  // node label path ->
  std::optional<PlayerId> maxmin_player;
  std::optional<double> maxmin_value;
  std::optional<double> maxmin_threshold;
  std::optional<double> tail_mean_above_threshold_fraction;
  std::optional<double> spe_delta;
  std::optional<double> spe_fraction_within;
  std::optional<Quantiles> spe_linf;
  std::vector<std::vector<LearnerSnapshot>> final_states;  // per trial, when dump_state
};

// Runs all trials (in parallel when jobs > 1) and aggregates. Results do not
// depend on the job count. When per_round_csv is set, one CSV row per round
// is written, grouped by trial in ascending order.
ExperimentReport run_experiment(const ExperimentConfig& cfg, std::ostream* per_round_csv = nullptr);

}  // namespace valarena
