#include "valarena/learning.hpp"

#include <algorithm>
#include <string>

namespace valarena {
namespace {

std::size_t slot_of(const GameTree& g, PlayerId player, NodeId move) {
  if (move <= 0 || move >= g.node_count() || g.move_owner(move) != player) {
    throw ValidationError("node " + std::to_string(move) + " is not a move of player " +
                          std::to_string(player));
  }
  return static_cast<std::size_t>(g.move_slot(move));
}

const Node& owned_decision_node(const GameTree& g, PlayerId player, NodeId n) {
  if (n < 0 || n >= g.node_count() || g.node(n).is_terminal() || g.node(n).player != player) {
    throw ValidationError("node " + std::to_string(n) + " is not a decision node of player " +
                          std::to_string(player));
  }
  return g.node(n);
}

}  // namespace

Valuation::Valuation(const GameTree& g, PlayerId player, double constant)
    : player_(player), values_(g.moves_of(player).size(), constant) {}

Valuation::Valuation(const GameTree& g, PlayerId player,
                     const std::map<std::string, double>& by_path)
    : player_(player), values_(g.moves_of(player).size(), 0.0) {
  std::size_t used = 0;
  for (NodeId move : g.moves_of(player)) {
    std::string path = g.label_path(move);
    auto it = by_path.find(path);
    if (it == by_path.end()) {
      throw ValidationError("initial valuation is missing move '" + path + "'");
    }
    values_[static_cast<std::size_t>(g.move_slot(move))] = it->second;
    ++used;
  }
  if (used != by_path.size()) {
    for (const auto& [key, value] : by_path) {
      (void)value;
      bool found = false;
      for (NodeId move : g.moves_of(player)) {
        if (g.label_path(move) == key) {
          found = true;
          break;
        }
      }
      if (!found) {
        throw ValidationError("initial valuation names '" + key + "', which is not a move of player " +
                              std::to_string(player));
      }
    }
  }
}

double Valuation::at(const GameTree& g, NodeId move) const {
  return values_[slot_of(g, player_, move)];
}

void Valuation::set(const GameTree& g, NodeId move, double value) {
  if (value == 0.0) value = 0.0;  // normalize -0.0 so state comparisons stay bitwise
  values_[slot_of(g, player_, move)] = value;
}

AveragingState::AveragingState(Valuation initial)
    : initial_(std::move(initial)),
      sums_(initial_.values().size(), 0.0),
      counts_(initial_.values().size(), 0) {}

double AveragingState::current(const GameTree& g, NodeId move) const {
  std::size_t slot = slot_of(g, initial_.player(), move);
  if (counts_[slot] == 0) return initial_.values()[slot];
  return sums_[slot] / static_cast<double>(counts_[slot]);
}

long long AveragingState::count(const GameTree& g, NodeId move) const {
  return counts_[slot_of(g, initial_.player(), move)];
}

void AveragingState::observe(const GameTree& g, NodeId move, double payoff) {
  std::size_t slot = slot_of(g, initial_.player(), move);
  sums_[slot] += payoff;
  ++counts_[slot];
}

Valuation AveragingState::current_valuation(const GameTree& g) const {
  Valuation v = initial_;
  for (NodeId move : g.moves_of(initial_.player())) {
    v.set(g, move, current(g, move));
  }
  return v;
}

std::vector<double> myopic_distribution(const GameTree& g, const Valuation& v, NodeId n) {
  const Node& nd = owned_decision_node(g, v.player(), n);
  std::vector<double> out(nd.moves.size(), 0.0);
  double best = v.at(g, nd.moves[0].child);
  for (std::size_t k = 1; k < nd.moves.size(); ++k) {
    best = std::max(best, v.at(g, nd.moves[k].child));
  }
  int argmax_count = 0;
  for (const Move& m : nd.moves) {
    if (v.at(g, m.child) == best) ++argmax_count;
  }
  for (std::size_t k = 0; k < nd.moves.size(); ++k) {
    if (v.at(g, nd.moves[k].child) == best) out[k] = 1.0 / argmax_count;
  }
  return out;
}

std::vector<double> exploratory_distribution(const GameTree& g, const Valuation& v, NodeId n,
                                             double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw ValidationError("exploration weight must lie in [0, 1]");
  }
  std::vector<double> out = myopic_distribution(g, v, n);
  double uniform = 1.0 / static_cast<double>(out.size());
  for (double& p : out) p = (1.0 - delta) * p + delta * uniform;
  return out;
}

Valuation memoryless_revise(const GameTree& g, Valuation v, const PathRecord& path, double payoff) {
  for (NodeId move : path.moves) {
    if (g.move_owner(move) == v.player()) v.set(g, move, payoff);
  }
  return v;
}

AveragingState averaging_revise(const GameTree& g, AveragingState s, const PathRecord& path,
                                double payoff) {
  for (NodeId move : path.moves) {
    if (g.move_owner(move) == s.player()) s.observe(g, move, payoff);
  }
  return s;
}

Valuation make_initial_valuation(const GameTree& g, PlayerId player, const InitialValuation& init) {
  if (init.explicit_map) return Valuation(g, player, init.by_path);
  return Valuation(g, player, init.constant);
}

LearnerState::LearnerState(const GameTree& g, const LearnerConfig& cfg)
    : cfg_(cfg), current_(make_initial_valuation(g, cfg.player, cfg.initial)) {
  if (cfg_.revision_rule == RevisionRuleKind::kAveraging) {
    averaging_.emplace(current_);
  }
  if (cfg_.strategy_rule.kind == StrategyRuleKind::kExploratory &&
      !(cfg_.strategy_rule.delta >= 0.0 && cfg_.strategy_rule.delta <= 1.0)) {
    throw ValidationError("exploration weight must lie in [0, 1]");
  }
}

long long LearnerState::observation_count(const GameTree& g, NodeId move) const {
  if (!averaging_) return 0;
  return averaging_->count(g, move);
}

void LearnerState::fill_distribution(const GameTree& g, NodeId n, std::vector<double>& out) const {
  if (cfg_.strategy_rule.kind == StrategyRuleKind::kMyopic) {
    out = myopic_distribution(g, current_, n);
  } else {
    out = exploratory_distribution(g, current_, n, cfg_.strategy_rule.delta);
  }
}

void LearnerState::observe(const GameTree& g, const PathRecord& path, double payoff) {
  if (cfg_.revision_rule == RevisionRuleKind::kMemoryless) {
    current_ = memoryless_revise(g, std::move(current_), path, payoff);
    return;
  }
  *averaging_ = averaging_revise(g, std::move(*averaging_), path, payoff);
  for (NodeId move : path.moves) {
    if (g.move_owner(move) == cfg_.player) {
      current_.set(g, move, averaging_->current(g, move));
    }
  }
}

}  // namespace valarena
