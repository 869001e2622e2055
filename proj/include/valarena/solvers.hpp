#pragma once

#include <vector>

#include "valarena/game.hpp"

namespace valarena {

// Pure strategy encoded as the chosen child index per decision node
// (-1 at terminals and at nodes the strategy leaves free).
using PureStrategy = std::vector<int>;

struct SpeResult {
  PureStrategy strategy;                    // chosen move index per decision node
  std::vector<std::vector<double>> values;  // per node: payoff vector under the equilibrium
};

struct MaxminResult {
  double value = 0;
  PureStrategy witness;  // protagonist choices achieving the value; -1 elsewhere
};

struct WinResult {
  bool can_win = false;
  PureStrategy witness;  // meaningful only when can_win
};

// Whether player i can force payoff 1 against jointly adversarial opponents.
// Requires is_win_lose_for(g, i).
WinResult can_guarantee_win(const GameTree& g, PlayerId i);

// Player i's security level: i maximizes at own nodes while all other
// players jointly minimize i's payoff. Under perfect information pure
// strategies attain the mixed maxmin, so the search is over child choices.
MaxminResult maxmin(const GameTree& g, PlayerId i);

// Backward induction requiring a strict best move at every decision node.
// Throws TieError naming the first (deepest, leftmost) node whose owner is
// indifferent between two moves.
SpeResult solve_spe(const GameTree& g);

}  // namespace valarena
