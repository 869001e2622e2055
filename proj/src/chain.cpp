#include "valarena/chain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <type_traits>

namespace valarena {
namespace {

template <typename S>
struct ScalarOps;

template <>
struct ScalarOps<double> {
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static double ratio(long long n, long long d) {
    return static_cast<double>(n) / static_cast<double>(d);
  }
  static double from_double(double x) { return x; }
  static bool is_one(double x) { return std::abs(x - 1.0) <= 1e-12; }
  static bool is_zero(double x) { return x == 0.0; }
};

template <>
struct ScalarOps<Rat> {
  static Rat zero() { return Rat(0); }
  static Rat one() { return Rat(1); }
  static Rat ratio(long long n, long long d) { return Rat(n, d); }
  static Rat from_double(double x) { return Rat::from_double(x); }
  static bool is_one(const Rat& x) { return x == Rat(1); }
  static bool is_zero(const Rat& x) { return x.is_zero(); }
};

double normalize_zero(double x) { return x == 0.0 ? 0.0 : x; }

void normalize_state(std::vector<double>& v) {
  for (double& x : v) x = normalize_zero(x);
}

// States compare bitwise. Values only ever arrive by copying payoffs or
// initial values (with -0 normalized), so bitwise equality coincides with
// exact numeric equality here.
struct StateLess {
  bool operator()(const std::vector<double>& a, const std::vector<double>& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
      auto x = std::bit_cast<std::uint64_t>(a[i]);
      auto y = std::bit_cast<std::uint64_t>(b[i]);
      if (x != y) return x < y;
    }
    return false;
  }
};

struct CheckedPlayers {
  PlayerId learner = 0;
  const LearnerConfig* config = nullptr;
};

CheckedPlayers check_players(const GameTree& g, const std::vector<PlayerSpec>& players) {
  if (static_cast<int>(players.size()) != g.player_count()) {
    throw ValidationError("chain analysis needs one entry per player");
  }
  CheckedPlayers out;
  for (std::size_t p = 0; p < players.size(); ++p) {
    const PlayerSpec& spec = players[p];
    if (const auto* lc = std::get_if<LearnerConfig>(&spec)) {
      if (out.config) throw ValidationError("chain analysis supports exactly one learner");
      if (lc->player != static_cast<PlayerId>(p + 1)) {
        throw ValidationError("learner declares the wrong seat");
      }
      if (lc->revision_rule != RevisionRuleKind::kMemoryless) {
        throw ValidationError(
            "averaging revision has an unbounded state space; chain analysis "
            "needs memoryless revision");
      }
      out.learner = static_cast<PlayerId>(p + 1);
      out.config = lc;
      continue;
    }
    if (std::holds_alternative<UniformPolicy>(spec)) continue;
    if (const auto* st = std::get_if<StationaryPolicy>(&spec)) {
      if (st->strategy.dist.size() != static_cast<std::size_t>(g.node_count())) {
        throw ValidationError("stationary strategy must cover every node id");
      }
      for (NodeId n : g.decision_nodes()) {
        if (g.node(n).player != static_cast<PlayerId>(p + 1)) continue;
        const auto& row = st->strategy.dist[static_cast<std::size_t>(n)];
        if (row.size() != g.node(n).moves.size()) {
          throw ValidationError("stationary strategy at node " + std::to_string(n) +
                                " has the wrong arity");
        }
        double sum = 0;
        for (double v : row) {
          if (!(v >= 0.0)) throw ValidationError("negative probability in stationary strategy");
          sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
          throw ValidationError("stationary strategy at node " + std::to_string(n) +
                                " does not sum to 1");
        }
      }
      continue;
    }
    throw ValidationError(
        "chain analysis needs stationary opponents (uniform or fixed behavioral "
        "strategies)");
  }
  if (!out.config) throw ValidationError("chain analysis needs exactly one learner");
  return out;
}

// Children of a decision node that carry positive probability: the argmax
// set for a greedy learner, every child once exploration mixes in, and an
// opponent's positive-probability moves.
std::vector<int> support_children(const GameTree& g, const CheckedPlayers& cp,
                                  const std::vector<PlayerSpec>& players, bool explore_all,
                                  const std::vector<double>& state, NodeId n) {
  const Node& nd = g.node(n);
  std::vector<int> out;
  if (nd.player == cp.learner) {
    if (explore_all) {
      for (std::size_t k = 0; k < nd.moves.size(); ++k) out.push_back(static_cast<int>(k));
      return out;
    }
    double best = state[static_cast<std::size_t>(g.move_slot(nd.moves[0].child))];
    for (std::size_t k = 1; k < nd.moves.size(); ++k) {
      best = std::max(best, state[static_cast<std::size_t>(g.move_slot(nd.moves[k].child))]);
    }
    for (std::size_t k = 0; k < nd.moves.size(); ++k) {
      if (state[static_cast<std::size_t>(g.move_slot(nd.moves[k].child))] == best) {
        out.push_back(static_cast<int>(k));
      }
    }
    return out;
  }
  const PlayerSpec& spec = players[static_cast<std::size_t>(nd.player - 1)];
  if (const auto* st = std::get_if<StationaryPolicy>(&spec)) {
    const auto& row = st->strategy.dist[static_cast<std::size_t>(n)];
    for (std::size_t k = 0; k < nd.moves.size(); ++k) {
      if (row[k] > 0.0) out.push_back(static_cast<int>(k));
    }
    return out;
  }
  for (std::size_t k = 0; k < nd.moves.size(); ++k) out.push_back(static_cast<int>(k));
  return out;
}

// Successor valuation after one round ending in `terminal`: the learner's
// moves along the path take the learner's round payoff.
std::vector<double> revise_state(const GameTree& g, const CheckedPlayers& cp,
                                 const std::vector<double>& state, NodeId terminal) {
  std::vector<double> next = state;
  double payoff =
      normalize_zero(g.node(terminal).payoffs[static_cast<std::size_t>(cp.learner - 1)]);
  for (NodeId cur = terminal; cur != g.root(); cur = g.node(cur).parent) {
    if (g.move_owner(cur) == cp.learner) {
      next[static_cast<std::size_t>(g.move_slot(cur))] = payoff;
    }
  }
  return next;
}

struct StateSet {
  std::vector<std::vector<double>> states;
  std::map<std::vector<double>, int, StateLess> index;
};

void collect_successors(const GameTree& g, const CheckedPlayers& cp,
                        const std::vector<PlayerSpec>& players, bool explore_all,
                        const std::vector<double>& state, NodeId n,
                        std::vector<std::vector<double>>& out) {
  const Node& nd = g.node(n);
  if (nd.is_terminal()) {
    out.push_back(revise_state(g, cp, state, n));
    return;
  }
  for (int k : support_children(g, cp, players, explore_all, state, n)) {
    collect_successors(g, cp, players, explore_all, state,
                       nd.moves[static_cast<std::size_t>(k)].child, out);
  }
}

StateSet discover_states(const GameTree& g, const CheckedPlayers& cp,
                         const std::vector<PlayerSpec>& players, bool explore_all,
                         const ChainOptions& opt) {
  StateSet set;
  std::vector<double> initial = make_initial_valuation(g, cp.learner, cp.config->initial).values();
  normalize_state(initial);
  set.index.emplace(initial, 0);
  set.states.push_back(initial);
  std::deque<int> queue{0};
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    std::vector<std::vector<double>> successors;
    collect_successors(g, cp, players, explore_all, set.states[static_cast<std::size_t>(u)],
                       g.root(), successors);
    for (auto& s : successors) {
      auto [it, inserted] = set.index.emplace(std::move(s), static_cast<int>(set.states.size()));
      if (inserted) {
        set.states.push_back(it->first);
        if (static_cast<long long>(set.states.size()) > opt.state_cap) {
          throw ChainError("state enumeration exceeded the cap of " +
                           std::to_string(opt.state_cap) + " states");
        }
        queue.push_back(it->second);
      }
    }
  }
  return set;
}

template <typename S>
void fill_row(const GameTree& g, const CheckedPlayers& cp, const std::vector<PlayerSpec>& players,
              bool exploratory, const S& delta, const StateSet& set,
              const std::vector<double>& state, NodeId n, const S& prob, std::vector<S>& row,
              S& expected) {
  using Ops = ScalarOps<S>;
  const Node& nd = g.node(n);
  if (nd.is_terminal()) {
    std::vector<double> next = revise_state(g, cp, state, n);
    auto it = set.index.find(next);
    row[static_cast<std::size_t>(it->second)] += prob;
    expected += prob * Ops::from_double(normalize_zero(
                           nd.payoffs[static_cast<std::size_t>(cp.learner - 1)]));
    return;
  }
  const long long m = static_cast<long long>(nd.moves.size());
  if (nd.player == cp.learner) {
    std::vector<int> argmax = support_children(g, cp, players, false, state, n);
    const long long k = static_cast<long long>(argmax.size());
    std::vector<char> is_argmax(nd.moves.size(), 0);
    for (int a : argmax) is_argmax[static_cast<std::size_t>(a)] = 1;
    for (std::size_t c = 0; c < nd.moves.size(); ++c) {
      S p = Ops::zero();
      if (exploratory) {
        p = delta * Ops::ratio(1, m);
        if (is_argmax[c]) p += (Ops::one() - delta) * Ops::ratio(1, k);
      } else if (is_argmax[c]) {
        p = Ops::ratio(1, k);
      }
      if (!Ops::is_zero(p)) {
        fill_row(g, cp, players, exploratory, delta, set, state, nd.moves[c].child, prob * p, row,
                 expected);
      }
    }
    return;
  }
  const PlayerSpec& spec = players[static_cast<std::size_t>(nd.player - 1)];
  for (std::size_t c = 0; c < nd.moves.size(); ++c) {
    S p = Ops::ratio(1, m);
    if (const auto* st = std::get_if<StationaryPolicy>(&spec)) {
      double q = st->strategy.dist[static_cast<std::size_t>(n)][c];
      if (q <= 0.0) continue;
      p = Ops::from_double(q);
    }
    fill_row(g, cp, players, exploratory, delta, set, state, nd.moves[c].child, prob * p, row,
             expected);
  }
}

std::string state_label(const GameTree& g, PlayerId learner, const std::vector<double>& state) {
  std::vector<std::pair<std::string, double>> parts;
  for (NodeId move : g.moves_of(learner)) {
    parts.emplace_back(g.label_path(move), state[static_cast<std::size_t>(g.move_slot(move))]);
  }
  std::sort(parts.begin(), parts.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string out;
  for (const auto& [path, value] : parts) {
    if (!out.empty()) out.push_back(' ');
    out += path;
    out.push_back('=');
    out += format_real(value);
  }
  return out;
}

template <typename S>
BasicChain<S> build_impl(const GameTree& g, const std::vector<PlayerSpec>& players,
                         bool exploratory, const S& delta, const ChainOptions& opt) {
  using Ops = ScalarOps<S>;
  CheckedPlayers cp = check_players(g, players);
  if (exploratory && (delta < Ops::zero() || Ops::one() < delta)) {
    throw ValidationError("exploration weight must lie in [0, 1]");
  }
  bool explore_all = exploratory && !Ops::is_zero(delta);
  StateSet set = discover_states(g, cp, players, explore_all, opt);
  const long long n = static_cast<long long>(set.states.size());
  if (n > opt.matrix_cap) {
    throw ChainError("transition matrix would need " + std::to_string(n) +
                     " states; cap is " + std::to_string(opt.matrix_cap));
  }

  BasicChain<S> chain;
  chain.learner = cp.learner;
  chain.states = set.states;
  chain.initial_state = 0;
  for (const auto& state : set.states) {
    chain.labels.push_back(state_label(g, cp.learner, state));
  }
  chain.rows.assign(static_cast<std::size_t>(n),
                    std::vector<S>(static_cast<std::size_t>(n), Ops::zero()));
  chain.expected_payoff.assign(static_cast<std::size_t>(n), Ops::zero());
  for (long long u = 0; u < n; ++u) {
    fill_row(g, cp, players, exploratory, delta, set, set.states[static_cast<std::size_t>(u)],
             g.root(), Ops::one(), chain.rows[static_cast<std::size_t>(u)],
             chain.expected_payoff[static_cast<std::size_t>(u)]);
    S sum = Ops::zero();
    for (const S& p : chain.rows[static_cast<std::size_t>(u)]) sum += p;
    if constexpr (std::is_same_v<S, Rat>) {
      if (!Ops::is_one(sum)) throw Error("internal: transition row does not sum to 1");
    } else {
      if (std::abs(sum - 1.0) > 1e-9) throw Error("internal: transition row does not sum to 1");
    }
    if (Ops::is_one(chain.rows[static_cast<std::size_t>(u)][static_cast<std::size_t>(u)])) {
      chain.absorbing.push_back(static_cast<int>(u));
    }
  }
  return chain;
}

// Gauss-Jordan solve of A X = B; exact under Rat, partial pivoting under
// double. Throws ChainError("singular ...") when A has no full rank.
template <typename S>
std::vector<std::vector<S>> gauss_solve(std::vector<std::vector<S>> a,
                                        std::vector<std::vector<S>> b) {
  using Ops = ScalarOps<S>;
  const std::size_t n = a.size();
  const std::size_t m = n == 0 ? 0 : b[0].size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    if constexpr (std::is_same_v<S, Rat>) {
      while (pivot < n && a[pivot][col].is_zero()) ++pivot;
      if (pivot == n) throw ChainError("singular linear system in chain analysis");
    } else {
      for (std::size_t r = col + 1; r < n; ++r) {
        if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
      }
      if (std::abs(a[pivot][col]) <= 1e-14) {
        throw ChainError("singular linear system in chain analysis");
      }
    }
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || Ops::is_zero(a[r][col])) continue;
      S factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      for (std::size_t c = 0; c < m; ++c) b[r][c] -= factor * b[col][c];
    }
  }
  std::vector<std::vector<S>> x(n, std::vector<S>(m, Ops::zero()));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) x[r][c] = b[r][c] / a[r][r];
  }
  return x;
}

template <typename S>
std::vector<char> positive_mask_reachability(const BasicChain<S>& chain, bool reversed) {
  const std::size_t n = chain.rows.size();
  std::vector<char> seen(n, 0);
  std::deque<std::size_t> queue{0};
  seen[0] = 1;
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v = 0; v < n; ++v) {
      const S& p = reversed ? chain.rows[v][u] : chain.rows[u][v];
      if (!ScalarOps<S>::is_zero(p) && !seen[v]) {
        seen[v] = 1;
        queue.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace

std::vector<std::vector<double>> enumerate_states(const GameTree& g,
                                                  const std::vector<PlayerSpec>& players,
                                                  const ChainOptions& opt) {
  CheckedPlayers cp = check_players(g, players);
  bool explore_all = cp.config->strategy_rule.kind == StrategyRuleKind::kExploratory &&
                     cp.config->strategy_rule.delta > 0.0;
  return discover_states(g, cp, players, explore_all, opt).states;
}

Chain build_chain(const GameTree& g, const std::vector<PlayerSpec>& players,
                  const ChainOptions& opt) {
  CheckedPlayers cp = check_players(g, players);
  bool exploratory = cp.config->strategy_rule.kind == StrategyRuleKind::kExploratory;
  return build_impl<double>(g, players, exploratory, cp.config->strategy_rule.delta, opt);
}

RationalChain build_chain_exact(const GameTree& g, const std::vector<PlayerSpec>& players,
                                const Rat& delta, const ChainOptions& opt) {
  CheckedPlayers cp = check_players(g, players);
  bool exploratory = cp.config->strategy_rule.kind == StrategyRuleKind::kExploratory;
  return build_impl<Rat>(g, players, exploratory, delta, opt);
}

template <typename S>
std::map<int, S> absorption_probabilities(const BasicChain<S>& chain, int from) {
  using Ops = ScalarOps<S>;
  const int n = static_cast<int>(chain.rows.size());
  if (from < 0 || from >= n) throw ValidationError("start state out of range");
  if (chain.absorbing.empty()) throw ChainError("chain has no absorbing state");
  std::vector<char> is_absorbing(static_cast<std::size_t>(n), 0);
  for (int a : chain.absorbing) is_absorbing[static_cast<std::size_t>(a)] = 1;
  if (is_absorbing[static_cast<std::size_t>(from)]) {
    return {{from, Ops::one()}};
  }
  std::vector<int> transient;
  std::vector<int> transient_index(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    if (!is_absorbing[static_cast<std::size_t>(i)]) {
      transient_index[static_cast<std::size_t>(i)] = static_cast<int>(transient.size());
      transient.push_back(i);
    }
  }
  const std::size_t t = transient.size();
  const std::size_t a = chain.absorbing.size();
  std::vector<std::vector<S>> m(t, std::vector<S>(t, Ops::zero()));
  std::vector<std::vector<S>> b(t, std::vector<S>(a, Ops::zero()));
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < t; ++j) {
      m[i][j] = (i == j ? Ops::one() : Ops::zero()) -
                chain.rows[static_cast<std::size_t>(transient[i])][static_cast<std::size_t>(transient[j])];
    }
    for (std::size_t j = 0; j < a; ++j) {
      b[i][j] = chain.rows[static_cast<std::size_t>(transient[i])]
                          [static_cast<std::size_t>(chain.absorbing[j])];
    }
  }
  std::vector<std::vector<S>> x = gauss_solve(std::move(m), std::move(b));
  std::map<int, S> out;
  const int row = transient_index[static_cast<std::size_t>(from)];
  for (std::size_t j = 0; j < a; ++j) {
    out[chain.absorbing[j]] = x[static_cast<std::size_t>(row)][j];
  }
  return out;
}

template <typename S>
std::vector<S> stationary_distribution(const BasicChain<S>& chain) {
  using Ops = ScalarOps<S>;
  const std::size_t n = chain.rows.size();
  std::vector<char> fwd = positive_mask_reachability(chain, false);
  std::vector<char> bwd = positive_mask_reachability(chain, true);
  for (std::size_t i = 0; i < n; ++i) {
    if (!fwd[i] || !bwd[i]) {
      throw ChainError("chain is reducible; the stationary distribution is not unique");
    }
  }
  // (P^T - I) pi = 0 with the first equation replaced by sum(pi) = 1.
  std::vector<std::vector<S>> m(n, std::vector<S>(n, Ops::zero()));
  std::vector<std::vector<S>> b(n, std::vector<S>(1, Ops::zero()));
  for (std::size_t j = 0; j < n; ++j) m[0][j] = Ops::one();
  b[0][0] = Ops::one();
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      m[i][j] = chain.rows[j][i] - (i == j ? Ops::one() : Ops::zero());
    }
  }
  std::vector<std::vector<S>> x = gauss_solve(std::move(m), std::move(b));
  std::vector<S> pi(n, Ops::zero());
  for (std::size_t i = 0; i < n; ++i) pi[i] = x[i][0];
  return pi;
}

template <typename S>
S expected_stationary_payoff(const BasicChain<S>& chain) {
  std::vector<S> pi = stationary_distribution(chain);
  S out = ScalarOps<S>::zero();
  for (std::size_t i = 0; i < pi.size(); ++i) out += pi[i] * chain.expected_payoff[i];
  return out;
}

Chain to_numeric(const RationalChain& chain) {
  Chain out;
  out.learner = chain.learner;
  out.states = chain.states;
  out.labels = chain.labels;
  out.initial_state = chain.initial_state;
  out.absorbing = chain.absorbing;
  out.rows.reserve(chain.rows.size());
  for (const auto& row : chain.rows) {
    std::vector<double> drow;
    drow.reserve(row.size());
    for (const Rat& p : row) drow.push_back(p.to_double());
    out.rows.push_back(std::move(drow));
  }
  for (const Rat& e : chain.expected_payoff) out.expected_payoff.push_back(e.to_double());
  return out;
}

std::vector<std::vector<double>> project_states(const GameTree& g, PlayerId learner,
                                                const std::vector<std::vector<double>>& states,
                                                const std::vector<std::string>& move_paths) {
  std::vector<std::size_t> slots;
  for (const std::string& path : move_paths) {
    NodeId move = g.node_at_path(path);
    if (move == g.root() || g.move_owner(move) != learner) {
      throw ValidationError("'" + path + "' is not a move of player " + std::to_string(learner));
    }
    slots.push_back(static_cast<std::size_t>(g.move_slot(move)));
  }
  std::vector<std::vector<double>> out;
  out.reserve(states.size());
  for (const auto& state : states) {
    std::vector<double> row;
    row.reserve(slots.size());
    for (std::size_t slot : slots) row.push_back(state[slot]);
    out.push_back(std::move(row));
  }
  return out;
}

template std::map<int, double> absorption_probabilities<double>(const BasicChain<double>&, int);
template std::map<int, Rat> absorption_probabilities<Rat>(const BasicChain<Rat>&, int);
template std::vector<double> stationary_distribution<double>(const BasicChain<double>&);
template std::vector<Rat> stationary_distribution<Rat>(const BasicChain<Rat>&);
template double expected_stationary_payoff<double>(const BasicChain<double>&);
template Rat expected_stationary_payoff<Rat>(const BasicChain<Rat>&);

}  // namespace valarena
