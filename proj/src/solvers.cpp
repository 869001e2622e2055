#include "valarena/solvers.hpp"

#include <string>

namespace valarena {
namespace {

// Max-min evaluation: player i picks max at own nodes, everyone else picks
// min of i's continuation value. Fills choices for the protagonist's nodes
// (and the minimizers' when record_opponents is set).
double maxmin_value(const GameTree& g, PlayerId i, NodeId id, PureStrategy& witness,
                    bool record_opponents) {
  const Node& nd = g.node(id);
  if (nd.is_terminal()) return nd.payoffs[static_cast<std::size_t>(i - 1)];
  int best = -1;
  double best_value = 0;
  for (std::size_t k = 0; k < nd.moves.size(); ++k) {
    double v = maxmin_value(g, i, nd.moves[k].child, witness, record_opponents);
    bool better = best < 0 || (nd.player == i ? v > best_value : v < best_value);
    if (better) {
      best = static_cast<int>(k);
      best_value = v;
    }
  }
  if (nd.player == i || record_opponents) witness[static_cast<std::size_t>(id)] = best;
  return best_value;
}

}  // namespace

MaxminResult maxmin(const GameTree& g, PlayerId i) {
  if (i < 1 || i > g.player_count()) throw ValidationError("player index out of range");
  MaxminResult result;
  result.witness.assign(static_cast<std::size_t>(g.node_count()), -1);
  result.value = maxmin_value(g, i, g.root(), result.witness, false);
  return result;
}

WinResult can_guarantee_win(const GameTree& g, PlayerId i) {
  if (i < 1 || i > g.player_count()) throw ValidationError("player index out of range");
  if (!is_win_lose_for(g, i)) {
    throw ValidationError("player " + std::to_string(i) + "'s payoffs are not all in {0, 1}");
  }
  WinResult result;
  result.witness.assign(static_cast<std::size_t>(g.node_count()), -1);
  result.can_win = maxmin_value(g, i, g.root(), result.witness, false) == 1.0;
  if (!result.can_win) result.witness.assign(static_cast<std::size_t>(g.node_count()), -1);
  return result;
}

namespace {

// Bottom-up, children before parents, left to right, so a tie is reported at
// the deepest, leftmost indifferent node.
const std::vector<double>& spe_value(const GameTree& g, NodeId id, SpeResult& result) {
  const Node& nd = g.node(id);
  auto& slot = result.values[static_cast<std::size_t>(id)];
  if (nd.is_terminal()) {
    slot = nd.payoffs;
    return slot;
  }
  int best = -1;
  double best_value = 0;
  for (std::size_t k = 0; k < nd.moves.size(); ++k) {
    const std::vector<double>& child = spe_value(g, nd.moves[k].child, result);
    double v = child[static_cast<std::size_t>(nd.player - 1)];
    if (best < 0 || v > best_value) {
      best = static_cast<int>(k);
      best_value = v;
    } else if (v == best_value) {
      throw TieError("player " + std::to_string(nd.player) + " is indifferent between moves '" +
                         nd.moves[static_cast<std::size_t>(best)].label + "' and '" + nd.moves[k].label +
                         "' at node " + std::to_string(id),
                     id);
    }
  }
  result.strategy[static_cast<std::size_t>(id)] = best;
  slot = result.values[static_cast<std::size_t>(nd.moves[static_cast<std::size_t>(best)].child)];
  return slot;
}

}  // namespace

SpeResult solve_spe(const GameTree& g) {
  SpeResult result;
  result.strategy.assign(static_cast<std::size_t>(g.node_count()), -1);
  result.values.assign(static_cast<std::size_t>(g.node_count()), {});
  spe_value(g, g.root(), result);
  return result;
}

}  // namespace valarena
