#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "valarena/game.hpp"
#include "valarena/solvers.hpp"

namespace valarena::verify {

// Embedded copies of the bundled fixture games. The files under figures/
// must match these byte for byte (a test pins that).
const std::string& fixture_text(const std::string& name);
std::vector<std::string> fixture_names();

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string details;             // human-readable numbers / failure notes
  nlohmann::ordered_json data;     // machine-readable key results
  double seconds = 0;
};

struct SuiteOptions {
  // example2-chain: report the transition matrix at this single rational
  // exploration parameter (e.g. "1/10") instead of the full sweep.
  std::optional<std::string> delta;
  long long trials = -1;  // -1 keeps the suite's pinned default
  long long rounds = -1;
  int jobs = 0;
};

const std::vector<std::string>& suite_names();
CheckResult run_suite(const std::string& name, const SuiteOptions& opt = {});
std::vector<CheckResult> run_all(const SuiteOptions& opt = {});

// ---- deterministic random instances for oracle and property checks ----

struct GenOptions {
  int players = 2;
  int max_depth = 3;
  int max_moves = 3;
  int max_decision_nodes = 6;
  bool generic = false;           // pairwise-distinct integer payoffs per player
  bool win_lose_player1 = false;  // player 1 payoffs drawn from {0, 1}
};

GameTree random_game(std::mt19937_64& rng, const GenOptions& opt);

// ---- brute-force oracles (definition-driven, independent of solvers) ----

// Every pure profile that survives the deviation test in every subgame for
// every player (exhaustive enumeration; fixture-sized games only).
std::vector<PureStrategy> spe_profiles_by_definition(const GameTree& g);

// max over i's pure strategies of min over all opponents' pure strategies.
double maxmin_by_enumeration(const GameTree& g, PlayerId i);

}  // namespace valarena::verify
