#include "valarena/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include "valarena/arena.hpp"
#include "valarena/chain.hpp"
#include "valarena/errors.hpp"
#include "valarena/learning.hpp"
#include "valarena/rational.hpp"

namespace valarena::verify {
namespace {

struct Fixture {
  const char* name;
  const char* text;
};

// Sources of truth for the bundled games; figures/*.game must match exactly.
const Fixture kFixtures[] = {
    {"fig1",
     "(player 1 (move L (player 2 (move a (payoffs 1 0)) (move b (payoffs 0 0)))) "
     "(move R (payoffs 1 0)))"},
    {"fig2",
     "(player 1 (move L (player 1 (move a (payoffs 10)) (move b (payoffs -10)))) "
     "(move R (payoffs 2)))"},
    {"wl_a",
     "(player 1 (move L (player 2 (move a (player 1 (move c (payoffs 1 0)) "
     "(move d (payoffs 0 1)))) (move b (payoffs 1 1)))) (move R (payoffs 0 0)))"},
    {"wl_b",
     "(player 1 (move L (player 2 (move a (payoffs 0 1)) (move b (player 1 "
     "(move c (payoffs 0 0)) (move d (payoffs 1 0)) (move e (payoffs 0 1)))))) "
     "(move R (player 2 (move a (payoffs 1 0)) (move b (player 1 "
     "(move c (payoffs 1 1)) (move d (payoffs 0 0)))))))"},
    {"gen2p",
     "(player 1 (move L (player 2 (move a (player 1 (move c (payoffs 9 8)) "
     "(move d (payoffs 7 6)))) (move b (payoffs 5 4)))) (move R (payoffs 2 7)))"},
    {"gen2p_b",
     "(player 1 (move L (player 2 (move a (player 1 (move c (payoffs 9 4)) "
     "(move d (payoffs 8 7)))) (move b (payoffs 6 2)))) (move R (payoffs 3 1)))"},
};

struct Checker {
  bool ok = true;
  std::string details;

  void note(const std::string& s) {
    if (!details.empty()) details += "; ";
    details += s;
  }
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      note("FAIL " + what);
    }
  }
};

std::string fmt(double x) { return format_real(x); }

std::shared_ptr<const GameTree> fixture_game(const std::string& name) {
  return std::make_shared<const GameTree>(parse_game(fixture_text(name)));
}

LearnerConfig make_learner(PlayerId p, StrategyRuleKind kind, double delta,
                           RevisionRuleKind rev, double v0) {
  LearnerConfig lc;
  lc.player = p;
  lc.strategy_rule.kind = kind;
  lc.strategy_rule.delta = delta;
  lc.revision_rule = rev;
  lc.initial.constant = v0;
  return lc;
}

// Calls fn(digits) for every mixed-radix assignment; exactly once when
// arities is empty.
template <typename F>
void for_each_assignment(const std::vector<int>& arities, F&& fn) {
  std::vector<int> digits(arities.size(), 0);
  for (;;) {
    fn(static_cast<const std::vector<int>&>(digits));
    std::size_t k = 0;
    while (k < digits.size()) {
      if (++digits[k] < arities[k]) break;
      digits[k] = 0;
      ++k;
    }
    if (k == digits.size()) return;
  }
}

// ---------------------------------------------------------------- suite 1

void example1_chain(Checker& c, nlohmann::ordered_json& data) {
  auto g = fixture_game("fig1");
  std::vector<PlayerSpec> players;
  players.push_back(make_learner(1, StrategyRuleKind::kMyopic, 0.0,
                                 RevisionRuleKind::kMemoryless, 0.0));
  players.push_back(UniformPolicy{});
  RationalChain chain = build_chain_exact(*g, players, Rat(0));

  c.expect(chain.states.size() == 3,
           "3 reachable states, got " + std::to_string(chain.states.size()));
  auto proj = project_states(*g, 1, chain.states, {"L", "R"});
  auto find_state = [&](double l, double r) {
    for (std::size_t i = 0; i < proj.size(); ++i) {
      if (proj[i] == std::vector<double>{l, r}) return static_cast<int>(i);
    }
    return -1;
  };
  int s00 = find_state(0, 0), s10 = find_state(1, 0), s01 = find_state(0, 1);
  c.expect(s00 >= 0 && s10 >= 0 && s01 >= 0,
           "states are exactly {(0,0),(1,0),(0,1)} on (L,R)");
  if (!c.ok) return;
  c.expect(chain.initial_state == s00, "initial state is (0,0)");
  c.expect(chain.absorbing == std::vector<int>{s01}, "(0,1) is the unique absorbing state");

  c.expect(chain.rows[s00][s01] == Rat(1, 2), "P((0,0)->(0,1)) = 1/2 exactly");
  c.expect(chain.rows[s00][s00] == Rat(1, 4) && chain.rows[s00][s10] == Rat(1, 4),
           "row of (0,0) is (1/4, 1/4, 1/2)");
  c.expect(chain.rows[s10][s00] == Rat(1, 2) && chain.rows[s10][s10] == Rat(1, 2) &&
               chain.rows[s10][s01] == Rat(0),
           "row of (1,0) is (1/2, 1/2, 0)");

  auto absorb = absorption_probabilities(chain, chain.initial_state);
  c.expect(absorb.size() == 1 && absorb.count(s01) == 1, "all mass absorbs at (0,1)");
  double p = absorb.count(s01) ? absorb.at(s01).to_double() : 0.0;
  c.expect(std::abs(p - 1.0) <= 1e-12, "absorption probability 1 within 1e-12");

  data["states"] = proj;
  data["one_step_to_absorbing"] = 0.5;
  data["absorption_probability"] = p;
  c.note("3 states; P((0,0)->(0,1))=1/2; absorption=" + fmt(p));
}

// ---------------------------------------------------------------- suite 2

// Learner for the one-player revision chain: exploratory + memoryless,
// starting from the valuation shown on the tree (10, 10, -10, 2).
std::vector<PlayerSpec> example2_players() {
  LearnerConfig lc;
  lc.player = 1;
  lc.strategy_rule.kind = StrategyRuleKind::kExploratory;
  lc.strategy_rule.delta = 0.0;  // replaced by the exact value per run
  lc.revision_rule = RevisionRuleKind::kMemoryless;
  lc.initial.explicit_map = true;
  lc.initial.by_path = {{"L", 10}, {"L/a", 10}, {"L/b", -10}, {"R", 2}};
  return {PlayerSpec{lc}};
}

void example2_chain(Checker& c, nlohmann::ordered_json& data,
                    const SuiteOptions& opt) {
  auto g = fixture_game("fig2");
  auto players = example2_players();

  std::vector<Rat> devs;
  if (opt.delta) {
    devs.push_back(Rat::parse(*opt.delta));
  } else {
    devs = {Rat(1, 10), Rat(1, 7), Rat(1, 3), Rat(2, 5), Rat(1, 2)};
  }

  auto chain_at = [&](const Rat& dev) {
    return build_chain_exact(*g, players, Rat(2) * dev);
  };

  nlohmann::ordered_json per_value = nlohmann::ordered_json::array();
  for (const Rat& d : devs) {
    if (!(d > Rat(0)) || d > Rat(1, 2)) {
      throw ValidationError("deviation probability must lie in (0, 1/2], got " + d.str());
    }
    RationalChain chain = chain_at(d);
    const std::string tag = " at deviation " + d.str();
    c.expect(chain.states.size() == 2, "2 reachable states" + tag);
    if (chain.states.size() != 2) continue;

    auto proj = project_states(*g, 1, chain.states, {"L", "R"});
    int s0 = chain.initial_state, s1 = 1 - chain.initial_state;
    c.expect((proj[s0] == std::vector<double>{10, 2}) &&
                 (proj[s1] == std::vector<double>{-10, 2}),
             "states project to (10,2) and (-10,2) on (L,R)" + tag);

    Rat diag = Rat(1) - d + d * d;
    Rat off = d - d * d;
    c.expect(chain.rows[s0][s0] == diag && chain.rows[s0][s1] == off &&
                 chain.rows[s1][s0] == off && chain.rows[s1][s1] == diag,
             "transition matrix is [[1-d+d^2, d-d^2], [d-d^2, 1-d+d^2]]" + tag);

    // Expected one-round payoff per state, exact in the deviation probability.
    Rat e0 = Rat(10) - Rat(28) * d + Rat(20) * d * d;
    Rat e1 = Rat(2) + Rat(8) * d - Rat(20) * d * d;
    c.expect(chain.expected_payoff[s0] == e0 && chain.expected_payoff[s1] == e1,
             "expected payoffs are 10-28d+20d^2 and 2+8d-20d^2" + tag);

    auto pi = stationary_distribution(chain);
    c.expect(pi[0] == Rat(1, 2) && pi[1] == Rat(1, 2),
             "stationary distribution is (1/2, 1/2) exactly" + tag);
    Rat mean = expected_stationary_payoff(chain);
    c.expect(mean == Rat(6) - Rat(10) * d, "stationary mean payoff is 6-10d" + tag);

    nlohmann::ordered_json entry;
    entry["deviation"] = d.str();
    entry["exploration_weight"] = (Rat(2) * d).str();
    entry["matrix"] = {{diag.to_double(), off.to_double()},
                       {off.to_double(), diag.to_double()}};
    entry["matrix_exact"] = {{diag.str(), off.str()}, {off.str(), diag.str()}};
    entry["stationary"] = {0.5, 0.5};
    entry["mean_payoff"] = mean.to_double();
    per_value.push_back(std::move(entry));
  }

  // Vanishing-exploration limit of the stationary mean, extrapolated exactly
  // from three rational evaluation points (the mean is quadratic in d at most).
  Rat xs[3] = {Rat(1, 8), Rat(1, 16), Rat(1, 32)};
  Rat ms[3];
  for (int i = 0; i < 3; ++i) ms[i] = expected_stationary_payoff(chain_at(xs[i]));
  Rat limit(0);
  for (int i = 0; i < 3; ++i) {
    Rat term = ms[i];
    for (int j = 0; j < 3; ++j) {
      if (j == i) continue;
      term = term * ((Rat(0) - xs[j]) / (xs[i] - xs[j]));
    }
    limit += term;
  }
  c.expect(limit == Rat(6), "stationary mean tends to 6 as exploration vanishes, got " + limit.str());

  data["checks"] = std::move(per_value);
  data["vanishing_exploration_mean"] = limit.to_double();
  if (c.ok) {
    c.note(std::to_string(devs.size()) + " deviation value(s) match the exact matrix; limit mean " +
           limit.str());
  }
}

// ---------------------------------------------------------------- suite 3

void win_guarantee(Checker& c, nlohmann::ordered_json& data, const SuiteOptions& opt) {
  const char* games[] = {"fig1", "wl_a", "wl_b"};
  const char* opponents[] = {"uniform", "adversarial", "learner"};
  long long trials = opt.trials > 0 ? opt.trials : 1000;
  long long rounds = opt.rounds > 0 ? opt.rounds : 500;

  for (int gi = 0; gi < 3; ++gi) {
    auto g = fixture_game(games[gi]);
    c.expect(is_win_lose_for(*g, 1), std::string(games[gi]) + " is win-lose for player 1");
    c.expect(can_guarantee_win(*g, 1).can_win,
             std::string(games[gi]) + " player 1 can guarantee a win");
    for (int oi = 0; oi < 3; ++oi) {
      ExperimentConfig cfg;
      cfg.game = g;
      cfg.game_path = std::string("figures/") + games[gi] + ".game";
      cfg.players.push_back(make_learner(1, StrategyRuleKind::kMyopic, 0.0,
                                         RevisionRuleKind::kMemoryless, 0.0));
      if (oi == 0) {
        cfg.players.push_back(UniformPolicy{});
      } else if (oi == 1) {
        cfg.players.push_back(AdversarialPolicy{});
      } else {
        cfg.players.push_back(make_learner(2, StrategyRuleKind::kMyopic, 0.0,
                                           RevisionRuleKind::kMemoryless, 0.0));
      }
      cfg.rounds = rounds;
      cfg.trials = trials;
      cfg.base_seed = 90101 + 16ULL * gi + oi;
      cfg.tail_window = std::min<long long>(100, rounds);
      cfg.suite = "thm1";
      cfg.jobs = opt.jobs;
      cfg.normalize();

      ExperimentReport rep = run_experiment(cfg);
      double f = rep.all_win_tail_fraction[0];
      std::string label = std::string(games[gi]) + " vs " + opponents[oi];
      c.expect(f >= 0.99, label + " all-win tail fraction " + fmt(f) + " >= 0.99");
      data[games[gi]][opponents[oi]] = f;
      c.note(label + ": " + fmt(f));
    }
  }
  data["trials"] = trials;
  data["rounds"] = rounds;
}

// ---------------------------------------------------------------- suite 4

void terminal_lock_in(Checker& c, nlohmann::ordered_json& data, const SuiteOptions& opt) {
  auto g = fixture_game("gen2p");
  c.expect(is_generic(*g), "gen2p is generic");
  c.expect(depth(*g) == 3, "gen2p has depth 3");

  ExperimentConfig cfg;
  cfg.game = g;
  cfg.game_path = "figures/gen2p.game";
  cfg.players.push_back(make_learner(1, StrategyRuleKind::kMyopic, 0.0,
                                     RevisionRuleKind::kMemoryless, 0.0));
  cfg.players.push_back(make_learner(2, StrategyRuleKind::kMyopic, 0.0,
                                     RevisionRuleKind::kMemoryless, 0.0));
  cfg.rounds = opt.rounds > 0 ? opt.rounds : 500;
  cfg.trials = opt.trials > 0 ? opt.trials : 1000;
  cfg.base_seed = 90201;
  cfg.tail_window = std::min<long long>(200, cfg.rounds);
  cfg.jobs = opt.jobs;
  cfg.normalize();

  ExperimentReport rep = run_experiment(cfg);
  double f = rep.single_terminal_tail_fraction;
  c.expect(f >= 0.99, "single-terminal tail fraction " + fmt(f) + " >= 0.99");
  data["single_terminal_tail_fraction"] = f;
  data["trials"] = cfg.trials;
  data["rounds"] = cfg.rounds;
  c.note("single-terminal tail fraction " + fmt(f));
}

// ---------------------------------------------------------------- suite 5

void maxmin_guarantee(Checker& c, nlohmann::ordered_json& data, const SuiteOptions& opt) {
  long long trials = opt.trials > 0 ? opt.trials : 100;
  long long rounds = opt.rounds > 0 ? opt.rounds : 50000;
  long long window = std::min<long long>(10000, rounds);

  auto run_one = [&](const std::shared_ptr<const GameTree>& g, const std::string& path,
                     int opponent_kind, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.game = g;
    cfg.game_path = path;
    cfg.players.push_back(make_learner(1, StrategyRuleKind::kExploratory, 0.01,
                                       RevisionRuleKind::kAveraging, 0.0));
    if (opponent_kind == 1) cfg.players.push_back(UniformPolicy{});
    if (opponent_kind == 2) cfg.players.push_back(AdversarialPolicy{});
    cfg.rounds = rounds;
    cfg.trials = trials;
    cfg.base_seed = seed;
    cfg.tail_window = window;
    cfg.epsilon = 0.5;
    cfg.maxmin_player = 1;
    cfg.jobs = opt.jobs;
    cfg.normalize();
    return run_experiment(cfg);
  };

  {
    auto g = fixture_game("fig2");
    c.expect(maxmin(*g, 1).value == 10.0, "fig2 security level is 10");
    c.expect(maxmin_by_enumeration(*g, 1) == 10.0, "fig2 enumeration agrees on 10");
    ExperimentReport rep = run_one(g, "figures/fig2.game", 0, 90301);
    double f = rep.tail_mean_above_threshold_fraction.value_or(0.0);
    c.expect(f >= 0.95, "fig2 tail mean above 9.5 in " + fmt(f) + " of trials (need >= 0.95)");
    data["fig2"] = {{"maxmin", 10.0}, {"fraction_above_threshold", f}};
    c.note("fig2: " + fmt(f));
  }

  {
    auto g = fixture_game("gen2p_b");
    double rho = maxmin(*g, 1).value;
    c.expect(rho == 6.0, "gen2p_b security level is 6");
    c.expect(maxmin_by_enumeration(*g, 1) == rho, "gen2p_b enumeration agrees");
    ExperimentReport uni = run_one(g, "figures/gen2p_b.game", 1, 90302);
    ExperimentReport adv = run_one(g, "figures/gen2p_b.game", 2, 90303);
    double fu = uni.tail_mean_above_threshold_fraction.value_or(0.0);
    double fa = adv.tail_mean_above_threshold_fraction.value_or(0.0);
    c.expect(fu >= 0.95, "gen2p_b vs uniform fraction " + fmt(fu) + " >= 0.95");
    c.expect(fa >= 0.95, "gen2p_b vs adversarial fraction " + fmt(fa) + " >= 0.95");
    data["gen2p_b"] = {{"maxmin", rho},
                       {"uniform_fraction", fu},
                       {"adversarial_fraction", fa}};
    c.note("gen2p_b uniform: " + fmt(fu) + ", adversarial: " + fmt(fa));
  }
  data["trials"] = trials;
  data["rounds"] = rounds;
  data["tail_window"] = window;
}

// ---------------------------------------------------------------- suite 6

void equilibrium_mixture(Checker& c, nlohmann::ordered_json& data, const SuiteOptions& opt) {
  auto g = fixture_game("gen2p");
  SpeResult spe = solve_spe(*g);
  c.expect(spe.values[0] == std::vector<double>({9, 8}),
           "gen2p backward-induction value is (9, 8)");

  ExperimentConfig cfg;
  cfg.game = g;
  cfg.game_path = "figures/gen2p.game";
  cfg.players.push_back(make_learner(1, StrategyRuleKind::kExploratory, 0.05,
                                     RevisionRuleKind::kAveraging, 0.0));
  cfg.players.push_back(make_learner(2, StrategyRuleKind::kExploratory, 0.05,
                                     RevisionRuleKind::kAveraging, 0.0));
  cfg.rounds = opt.rounds > 0 ? opt.rounds : 50000;
  cfg.trials = opt.trials > 0 ? opt.trials : 100;
  cfg.base_seed = 90401;
  cfg.tail_window = std::min<long long>(5000, cfg.rounds);
  cfg.spe_check = SpeCheckConfig{0.03, 50};
  cfg.jobs = opt.jobs;
  cfg.normalize();

  ExperimentReport rep = run_experiment(cfg);
  double f = rep.spe_fraction_within.value_or(0.0);
  c.expect(rep.spe_delta.value_or(-1.0) == 0.05, "reference mixture uses the learners' delta");
  c.expect(f >= 0.95, "tail frequencies within 0.03 of the reference mixture in " + fmt(f) +
                          " of trials (need >= 0.95)");
  data["fraction_within_tolerance"] = f;
  if (rep.spe_linf) {
    data["linf_median"] = rep.spe_linf->median;
    data["linf_max"] = rep.spe_linf->max;
  }
  data["trials"] = cfg.trials;
  data["rounds"] = cfg.rounds;
  c.note("fraction within tolerance " + fmt(f));
}

// ---------------------------------------------------------------- suite 7

// Terminal payoffs under a dense decision assignment, walking from `from`.
const std::vector<double>& outcome_from(const GameTree& g, NodeId from,
                                        const std::vector<int>& choice_by_node) {
  NodeId cur = from;
  while (!g.node(cur).is_terminal()) {
    cur = g.node(cur).moves[static_cast<std::size_t>(choice_by_node[static_cast<std::size_t>(cur)])].child;
  }
  return g.node(cur).payoffs;
}

// Worst case over all opponents' pure strategies with player i's choices
// pinned by `witness`.
double witness_floor(const GameTree& g, PlayerId i, const PureStrategy& witness) {
  std::vector<NodeId> others;
  std::vector<int> arities;
  for (NodeId n : g.decision_nodes()) {
    if (g.node(n).player != i) {
      others.push_back(n);
      arities.push_back(static_cast<int>(g.node(n).moves.size()));
    }
  }
  double worst = std::numeric_limits<double>::infinity();
  std::vector<int> choice(static_cast<std::size_t>(g.node_count()), -1);
  for (NodeId n : g.decision_nodes()) {
    if (g.node(n).player == i) choice[static_cast<std::size_t>(n)] = witness[static_cast<std::size_t>(n)];
  }
  for_each_assignment(arities, [&](const std::vector<int>& assign) {
    for (std::size_t k = 0; k < others.size(); ++k) {
      choice[static_cast<std::size_t>(others[k])] = assign[k];
    }
    worst = std::min(worst, outcome_from(g, g.root(), choice)[static_cast<std::size_t>(i - 1)]);
  });
  return worst;
}

// Full game tree of the given depth and branching factor, ownership rotating
// by level, payoffs generic by construction.
GameTree full_tree_generic(std::mt19937_64& rng, int dpt, int branching, int players) {
  std::vector<Node> nodes;
  const char* labels[] = {"a", "b", "c"};
  std::function<NodeId(int)> rec = [&](int d) -> NodeId {
    NodeId id = static_cast<NodeId>(nodes.size());
    nodes.emplace_back();
    if (d == dpt) {
      nodes[static_cast<std::size_t>(id)].payoffs.assign(static_cast<std::size_t>(players), 0.0);
      return id;
    }
    nodes[static_cast<std::size_t>(id)].player = 1 + d % players;
    for (int j = 0; j < branching; ++j) {
      NodeId ch = rec(d + 1);
      nodes[static_cast<std::size_t>(ch)].parent = id;
      nodes[static_cast<std::size_t>(id)].moves.push_back(Move{labels[j], ch});
    }
    return id;
  };
  rec(0);

  std::vector<std::size_t> terminals;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_terminal()) terminals.push_back(i);
  }
  for (int p = 0; p < players; ++p) {
    std::vector<int> pool;
    int span = static_cast<int>(terminals.size()) + 5;
    for (int v = -span; v <= span; ++v) pool.push_back(v);
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t k = 0; k < terminals.size(); ++k) {
      nodes[terminals[k]].payoffs[static_cast<std::size_t>(p)] = pool[k];
    }
  }
  return GameTree(std::move(nodes), players);
}

void oracle_equivalence(Checker& c, nlohmann::ordered_json& data) {
  std::mt19937_64 rng(20260816ULL);
  std::vector<GameTree> games;

  games.push_back(parse_game("(payoffs 3)"));
  games.push_back(parse_game("(payoffs 3 -2)"));
  struct Shape {
    int depth, branching, players;
  };
  const Shape shapes[] = {{1, 2, 1}, {1, 3, 1}, {1, 2, 2}, {2, 2, 1},
                          {2, 2, 2}, {2, 3, 2}, {3, 2, 1}, {3, 2, 2}};
  for (const Shape& s : shapes) {
    games.push_back(full_tree_generic(rng, s.depth, s.branching, s.players));
  }
  GenOptions gen;
  gen.generic = true;
  gen.max_decision_nodes = 5;
  int want = 60;
  int tries = 0;
  while (static_cast<int>(games.size()) < want && tries < 10 * want) {
    ++tries;
    gen.players = 1 + static_cast<int>(rng() % 2);
    gen.max_depth = 2 + static_cast<int>(rng() % 2);
    games.push_back(random_game(rng, gen));
  }

  int checked = 0;
  for (const GameTree& g : games) {
    const std::string tag = " (instance " + std::to_string(checked) + ")";
    c.expect(is_generic(g), "instance is generic" + tag);

    auto defs = spe_profiles_by_definition(g);
    c.expect(defs.size() == 1, "exactly one profile survives the deviation test" + tag);
    if (defs.size() != 1) return;

    SpeResult spe = solve_spe(g);
    bool same_strategy = true;
    for (NodeId n : g.decision_nodes()) {
      if (spe.strategy[static_cast<std::size_t>(n)] != defs[0][static_cast<std::size_t>(n)]) {
        same_strategy = false;
      }
    }
    c.expect(same_strategy, "backward induction matches the enumerated profile" + tag);
    bool same_values = true;
    for (NodeId n = 0; n < g.node_count(); ++n) {
      if (spe.values[static_cast<std::size_t>(n)] != outcome_from(g, n, defs[0])) {
        same_values = false;
      }
    }
    c.expect(same_values, "equilibrium values equal enumerated outcomes at every node" + tag);

    for (PlayerId i = 1; i <= g.player_count(); ++i) {
      MaxminResult mm = maxmin(g, i);
      double brute = maxmin_by_enumeration(g, i);
      c.expect(mm.value == brute, "security level matches enumeration for player " +
                                     std::to_string(i) + tag);
      c.expect(witness_floor(g, i, mm.witness) == mm.value,
               "security witness attains the level for player " + std::to_string(i) + tag);
    }
    ++checked;
    if (!c.ok) return;
  }
  c.expect(checked >= 50, "at least 50 instances checked, got " + std::to_string(checked));
  data["instances"] = checked;
  c.note(std::to_string(checked) + " instances, solvers equal enumeration exactly");
}

// ---------------------------------------------------------------- suite 8

struct PropertyWorld {
  GameTree g;
  std::vector<Valuation> vals;  // one per player
};

PropertyWorld random_world(std::mt19937_64& rng) {
  GenOptions gen;
  gen.players = 1 + static_cast<int>(rng() % 2);
  gen.max_depth = 1 + static_cast<int>(rng() % 3);
  gen.max_moves = 3;
  gen.max_decision_nodes = 5;
  PropertyWorld w{random_game(rng, gen), {}};
  for (PlayerId p = 1; p <= w.g.player_count(); ++p) {
    Valuation v(w.g, p, 0.0);
    for (NodeId m : w.g.moves_of(p)) {
      double x = (rng() % 2 == 0)
                     ? static_cast<double>(static_cast<int>(rng() % 5) - 2)
                     : (static_cast<double>(rng() >> 11) * 0x1.0p-53) * 4.0 - 2.0;
      v.set(w.g, m, x);
    }
    w.vals.push_back(std::move(v));
  }
  return w;
}

NodeId random_decision_node(std::mt19937_64& rng, const GameTree& g, PlayerId p) {
  std::vector<NodeId> owned;
  for (NodeId n : g.decision_nodes()) {
    if (g.node(n).player == p) owned.push_back(n);
  }
  if (owned.empty()) return kNoNode;
  return owned[rng() % owned.size()];
}

void properties(Checker& c, nlohmann::ordered_json& data) {
  const int kCases = 1000;
  std::mt19937_64 rng(0xC0FFEE123ULL);
  auto u01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  // Distributions are probability vectors.
  for (int t = 0; t < kCases && c.ok; ++t) {
    PropertyWorld w = random_world(rng);
    for (PlayerId p = 1; p <= w.g.player_count(); ++p) {
      NodeId n = random_decision_node(rng, w.g, p);
      if (n == kNoNode) continue;
      double delta = (t % 3 == 0) ? 0.0 : (t % 3 == 1 ? 1.0 : u01());
      std::vector<double> dist = (t % 2 == 0)
                                     ? myopic_distribution(w.g, w.vals[p - 1], n)
                                     : exploratory_distribution(w.g, w.vals[p - 1], n, delta);
      c.expect(dist.size() == w.g.node(n).moves.size(), "distribution arity");
      double sum = std::accumulate(dist.begin(), dist.end(), 0.0);
      c.expect(std::abs(sum - 1.0) <= 1e-12, "distribution sums to 1");
      for (double q : dist) c.expect(q >= 0.0 && q <= 1.0 + 1e-12, "probabilities in [0,1]");
    }
  }
  c.expect(c.ok, "normalization property");

  // Rules are invariant under adding a constant to the whole valuation.
  for (int t = 0; t < kCases && c.ok; ++t) {
    PropertyWorld w = random_world(rng);
    for (PlayerId p = 1; p <= w.g.player_count(); ++p) {
      NodeId n = random_decision_node(rng, w.g, p);
      if (n == kNoNode) continue;
      double shift = static_cast<double>(static_cast<int>(rng() % 11) - 5);
      Valuation shifted = w.vals[p - 1];
      for (NodeId m : w.g.moves_of(p)) shifted.set(w.g, m, shifted.at(w.g, m) + shift);
      double delta = u01();
      c.expect(myopic_distribution(w.g, w.vals[p - 1], n) ==
                   myopic_distribution(w.g, shifted, n),
               "best-move set invariant under constant shifts");
      c.expect(exploratory_distribution(w.g, w.vals[p - 1], n, delta) ==
                   exploratory_distribution(w.g, shifted, n, delta),
               "exploratory rule invariant under constant shifts");
    }
  }
  c.expect(c.ok, "shift invariance property");

  // Repeating the same observation leaves a revised valuation unchanged.
  for (int t = 0; t < kCases && c.ok; ++t) {
    PropertyWorld w = random_world(rng);
    const auto& terms = w.g.terminal_nodes();
    PathRecord path = w.g.path_to(terms[rng() % terms.size()]);
    double payoff = static_cast<double>(static_cast<int>(rng() % 21) - 10);
    for (PlayerId p = 1; p <= w.g.player_count(); ++p) {
      Valuation once = memoryless_revise(w.g, w.vals[p - 1], path, payoff);
      Valuation twice = memoryless_revise(w.g, once, path, payoff);
      c.expect(once == twice, "overwrite revision is idempotent");
    }
  }
  c.expect(c.ok, "idempotence property");

  // Averaging is order-independent over a batch of observations.
  for (int t = 0; t < kCases && c.ok; ++t) {
    PropertyWorld w = random_world(rng);
    const auto& terms = w.g.terminal_nodes();
    int k = 1 + static_cast<int>(rng() % 6);
    std::vector<std::pair<PathRecord, double>> obs;
    for (int j = 0; j < k; ++j) {
      obs.emplace_back(w.g.path_to(terms[rng() % terms.size()]),
                       static_cast<double>(static_cast<int>(rng() % 201) - 100));
    }
    PlayerId p = 1 + static_cast<PlayerId>(rng() % w.g.player_count());
    auto run_order = [&](const std::vector<std::size_t>& order) {
      AveragingState s(w.vals[p - 1]);
      for (std::size_t idx : order) {
        s = averaging_revise(w.g, std::move(s), obs[idx].first, obs[idx].second);
      }
      return s;
    };
    std::vector<std::size_t> order(obs.size());
    std::iota(order.begin(), order.end(), 0);
    AveragingState a = run_order(order);
    std::shuffle(order.begin(), order.end(), rng);
    AveragingState b = run_order(order);
    c.expect(a == b, "averaged observations are order-independent");
    c.expect(a.current_valuation(w.g) == b.current_valuation(w.g),
             "averaged valuations are order-independent");
  }
  c.expect(c.ok, "averaging permutation property");

  // Moves off the played path never change value.
  for (int t = 0; t < kCases && c.ok; ++t) {
    PropertyWorld w = random_world(rng);
    const auto& terms = w.g.terminal_nodes();
    PathRecord path = w.g.path_to(terms[rng() % terms.size()]);
    std::set<NodeId> on_path(path.moves.begin(), path.moves.end());
    double payoff = static_cast<double>(static_cast<int>(rng() % 21) - 10);
    for (PlayerId p = 1; p <= w.g.player_count(); ++p) {
      Valuation after = memoryless_revise(w.g, w.vals[p - 1], path, payoff);
      AveragingState avg = averaging_revise(w.g, AveragingState(w.vals[p - 1]), path, payoff);
      for (NodeId m : w.g.moves_of(p)) {
        if (on_path.count(m)) continue;
        c.expect(after.at(w.g, m) == w.vals[p - 1].at(w.g, m),
                 "overwrite revision touches only the path");
        c.expect(avg.current(w.g, m) == w.vals[p - 1].at(w.g, m),
                 "averaging revision touches only the path");
      }
    }
  }
  c.expect(c.ok, "off-path immutability property");

  // Exploration keeps every move and every node reachable.
  for (int t = 0; t < kCases && c.ok; ++t) {
    PropertyWorld w = random_world(rng);
    double delta = (t % 5 == 0) ? 1.0 : u01();
    if (delta == 0.0) delta = 0.5;
    int max_branch = 1;
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(w.g.node_count()));
    for (NodeId n : w.g.decision_nodes()) {
      const Node& nd = w.g.node(n);
      max_branch = std::max(max_branch, static_cast<int>(nd.moves.size()));
      rows[static_cast<std::size_t>(n)] =
          exploratory_distribution(w.g, w.vals[nd.player - 1], n, delta);
      double floor = delta / static_cast<double>(nd.moves.size());
      for (double q : rows[static_cast<std::size_t>(n)]) {
        c.expect(q >= floor - 1e-15, "each move keeps probability at least delta/m");
      }
    }
    for (PlayerId p = 1; p <= w.g.player_count(); ++p) {
      NodeId m = random_decision_node(rng, w.g, p);
      if (m == kNoNode) break;
      const auto& mlist = w.g.moves_of(p);
      m = mlist[rng() % mlist.size()];
      double reach = 1.0, bound = 1.0;
      int edges = 0;
      for (NodeId cur = m; cur != w.g.root(); cur = w.g.node(cur).parent) {
        NodeId par = w.g.node(cur).parent;
        reach *= rows[static_cast<std::size_t>(par)][static_cast<std::size_t>(w.g.sibling_index(cur))];
        bound *= delta / static_cast<double>(w.g.node(par).moves.size());
        ++edges;
      }
      c.expect(reach >= bound - 1e-15, "move reach probability dominates the per-node floor product");
      c.expect(reach >= std::pow(delta / max_branch, edges) - 1e-12,
               "move reach probability at least (delta/max-branching)^depth");
    }
  }
  c.expect(c.ok, "exploration floor property");

  // Same config and trial index, same record.
  for (int t = 0; t < kCases && c.ok; ++t) {
    GenOptions gen;
    gen.players = 1 + static_cast<int>(rng() % 2);
    gen.max_depth = 1 + static_cast<int>(rng() % 3);
    gen.max_decision_nodes = 4;
    auto g = std::make_shared<const GameTree>(random_game(rng, gen));
    ExperimentConfig cfg;
    cfg.game = g;
    cfg.game_path = "generated";
    bool exploratory = rng() % 2 == 0;
    cfg.players.push_back(make_learner(
        1, exploratory ? StrategyRuleKind::kExploratory : StrategyRuleKind::kMyopic,
        exploratory ? 0.25 : 0.0,
        rng() % 2 == 0 ? RevisionRuleKind::kMemoryless : RevisionRuleKind::kAveraging, 0.0));
    for (PlayerId p = 2; p <= g->player_count(); ++p) {
      switch (rng() % 3) {
        case 0: cfg.players.push_back(UniformPolicy{}); break;
        case 1: cfg.players.push_back(AdversarialPolicy{}); break;
        default:
          cfg.players.push_back(make_learner(p, StrategyRuleKind::kMyopic, 0.0,
                                             RevisionRuleKind::kMemoryless, 0.0));
      }
    }
    cfg.rounds = 1 + static_cast<long long>(rng() % 25);
    cfg.trials = 1;
    cfg.base_seed = rng();
    cfg.normalize();
    cfg.validate();
    long long index = static_cast<long long>(rng() % 7);
    c.expect(run_trial(cfg, index) == run_trial(cfg, index),
             "a trial is a pure function of config and trial index");
  }
  c.expect(c.ok, "trial determinism property");

  data["properties"] = 7;
  data["cases_each"] = kCases;
  if (c.ok) c.note("7 properties x 1000 cases");
}

}  // namespace

const std::string& fixture_text(const std::string& name) {
  for (const Fixture& f : kFixtures) {
    if (name == f.name) {
      static std::map<std::string, std::string> cache;
      auto [it, inserted] = cache.try_emplace(name, f.text);
      (void)inserted;
      return it->second;
    }
  }
  throw ValidationError("unknown fixture '" + name + "'");
}

std::vector<std::string> fixture_names() {
  std::vector<std::string> names;
  for (const Fixture& f : kFixtures) names.push_back(f.name);
  return names;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "example1-chain",    "example2-chain",      "win-guarantee",
      "terminal-lock-in",  "maxmin-guarantee",    "equilibrium-mixture",
      "oracle-equivalence", "properties"};
  return names;
}

CheckResult run_suite(const std::string& name, const SuiteOptions& opt) {
  bool known = false;
  for (const std::string& s : suite_names()) known = known || s == name;
  if (!known) {
    std::string all;
    for (const std::string& s : suite_names()) {
      if (!all.empty()) all += ", ";
      all += s;
    }
    throw ValidationError("unknown suite '" + name + "'; expected one of: " + all);
  }

  CheckResult r;
  r.name = name;
  Checker c;
  auto t0 = std::chrono::steady_clock::now();
  try {
    if (name == "example1-chain") example1_chain(c, r.data);
    if (name == "example2-chain") example2_chain(c, r.data, opt);
    if (name == "win-guarantee") win_guarantee(c, r.data, opt);
    if (name == "terminal-lock-in") terminal_lock_in(c, r.data, opt);
    if (name == "maxmin-guarantee") maxmin_guarantee(c, r.data, opt);
    if (name == "equilibrium-mixture") equilibrium_mixture(c, r.data, opt);
    if (name == "oracle-equivalence") oracle_equivalence(c, r.data);
    if (name == "properties") properties(c, r.data);
  } catch (const ValidationError&) {
    throw;  // bad user input (e.g. an out-of-range --delta), not a failed check
  } catch (const std::exception& e) {
    c.ok = false;
    c.note(std::string("exception: ") + e.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = c.ok;
  r.details = c.details;
  return r;
}

std::vector<CheckResult> run_all(const SuiteOptions& opt) {
  std::vector<CheckResult> out;
  for (const std::string& s : suite_names()) out.push_back(run_suite(s, opt));
  return out;
}

GameTree random_game(std::mt19937_64& rng, const GenOptions& opt) {
  if (opt.max_depth <= 0) {
    Node t;
    t.payoffs.resize(static_cast<std::size_t>(opt.players));
    for (std::size_t p = 0; p < t.payoffs.size(); ++p) {
      t.payoffs[p] = p == 0 && opt.win_lose_player1
                         ? static_cast<double>(rng() % 2)
                         : static_cast<double>(static_cast<int>(rng() % 7) - 3);
    }
    return GameTree({t}, opt.players);
  }

  std::vector<Node> nodes;
  int budget = std::max(1, opt.max_decision_nodes);
  const char* labels[] = {"a", "b", "c"};
  std::function<NodeId(int)> rec = [&](int d) -> NodeId {
    NodeId id = static_cast<NodeId>(nodes.size());
    nodes.emplace_back();
    bool terminal = d >= opt.max_depth || budget <= 0 || (d > 0 && rng() % 100 < 35);
    if (d == 0) terminal = false;
    if (terminal) {
      nodes[static_cast<std::size_t>(id)].payoffs.assign(static_cast<std::size_t>(opt.players), 0.0);
      return id;
    }
    --budget;
    nodes[static_cast<std::size_t>(id)].player = 1 + static_cast<PlayerId>(rng() % opt.players);
    int m = 1 + static_cast<int>(rng() % opt.max_moves);
    if (m == 1 && opt.max_moves > 1 && rng() % 2 == 0) m = 2;
    for (int j = 0; j < m; ++j) {
      NodeId ch = rec(d + 1);
      nodes[static_cast<std::size_t>(ch)].parent = id;
      nodes[static_cast<std::size_t>(id)].moves.push_back(Move{labels[j], ch});
    }
    return id;
  };
  rec(0);

  std::vector<std::size_t> terminals;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_terminal()) terminals.push_back(i);
  }
  for (int p = 0; p < opt.players; ++p) {
    if (opt.generic) {
      std::vector<int> pool;
      int span = static_cast<int>(terminals.size()) + 5;
      for (int v = -span; v <= span; ++v) pool.push_back(v);
      std::shuffle(pool.begin(), pool.end(), rng);
      for (std::size_t k = 0; k < terminals.size(); ++k) {
        nodes[terminals[k]].payoffs[static_cast<std::size_t>(p)] = pool[k];
      }
    } else if (p == 0 && opt.win_lose_player1) {
      for (std::size_t k : terminals) nodes[k].payoffs[0] = static_cast<double>(rng() % 2);
    } else {
      for (std::size_t k : terminals) {
        nodes[k].payoffs[static_cast<std::size_t>(p)] =
            static_cast<double>(static_cast<int>(rng() % 7) - 3);
      }
    }
  }
  return GameTree(std::move(nodes), opt.players);
}

std::vector<PureStrategy> spe_profiles_by_definition(const GameTree& g) {
  const auto& dn = g.decision_nodes();
  std::vector<int> arities;
  arities.reserve(dn.size());
  for (NodeId n : dn) arities.push_back(static_cast<int>(g.node(n).moves.size()));

  // Pre-order ids make each subtree a contiguous id range.
  std::vector<int> subtree_size(static_cast<std::size_t>(g.node_count()), 1);
  for (NodeId n = g.node_count() - 1; n >= 0; --n) {
    for (const Move& m : g.node(n).moves) {
      subtree_size[static_cast<std::size_t>(n)] += subtree_size[static_cast<std::size_t>(m.child)];
    }
  }
  auto in_subtree = [&](NodeId root, NodeId x) {
    return x >= root && x < root + subtree_size[static_cast<std::size_t>(root)];
  };

  // Per (subgame root, player): dense indices of the player's decisions inside.
  std::vector<std::vector<std::vector<std::size_t>>> own(
      static_cast<std::size_t>(g.node_count()),
      std::vector<std::vector<std::size_t>>(static_cast<std::size_t>(g.player_count())));
  for (NodeId s = 0; s < g.node_count(); ++s) {
    for (std::size_t k = 0; k < dn.size(); ++k) {
      if (in_subtree(s, dn[k])) {
        own[static_cast<std::size_t>(s)][static_cast<std::size_t>(g.node(dn[k]).player - 1)]
            .push_back(k);
      }
    }
  }

  std::vector<int> choice(static_cast<std::size_t>(g.node_count()), -1);
  auto apply = [&](const std::vector<int>& dense) {
    for (std::size_t k = 0; k < dn.size(); ++k) {
      choice[static_cast<std::size_t>(dn[k])] = dense[k];
    }
  };

  std::vector<PureStrategy> found;
  for_each_assignment(arities, [&](const std::vector<int>& profile) {
    bool equilibrium = true;
    for (NodeId s = 0; s < g.node_count() && equilibrium; ++s) {
      if (g.node(s).is_terminal()) continue;
      for (PlayerId i = 1; i <= g.player_count() && equilibrium; ++i) {
        const auto& mine = own[static_cast<std::size_t>(s)][static_cast<std::size_t>(i - 1)];
        if (mine.empty()) continue;
        apply(profile);
        double base = outcome_from(g, s, choice)[static_cast<std::size_t>(i - 1)];
        std::vector<int> dev_arities;
        dev_arities.reserve(mine.size());
        for (std::size_t k : mine) dev_arities.push_back(arities[k]);
        bool better = false;
        for_each_assignment(dev_arities, [&](const std::vector<int>& dev) {
          if (better) return;
          apply(profile);
          for (std::size_t t = 0; t < mine.size(); ++t) {
            choice[static_cast<std::size_t>(dn[mine[t]])] = dev[t];
          }
          if (outcome_from(g, s, choice)[static_cast<std::size_t>(i - 1)] > base) better = true;
        });
        if (better) equilibrium = false;
      }
    }
    if (equilibrium) {
      PureStrategy ps(static_cast<std::size_t>(g.node_count()), -1);
      for (std::size_t k = 0; k < dn.size(); ++k) {
        ps[static_cast<std::size_t>(dn[k])] = profile[k];
      }
      found.push_back(std::move(ps));
    }
  });
  return found;
}

double maxmin_by_enumeration(const GameTree& g, PlayerId i) {
  std::vector<NodeId> mine, others;
  std::vector<int> mine_ar, other_ar;
  for (NodeId n : g.decision_nodes()) {
    if (g.node(n).player == i) {
      mine.push_back(n);
      mine_ar.push_back(static_cast<int>(g.node(n).moves.size()));
    } else {
      others.push_back(n);
      other_ar.push_back(static_cast<int>(g.node(n).moves.size()));
    }
  }
  std::vector<int> choice(static_cast<std::size_t>(g.node_count()), -1);
  double best = -std::numeric_limits<double>::infinity();
  for_each_assignment(mine_ar, [&](const std::vector<int>& my) {
    for (std::size_t k = 0; k < mine.size(); ++k) {
      choice[static_cast<std::size_t>(mine[k])] = my[k];
    }
    double worst = std::numeric_limits<double>::infinity();
    for_each_assignment(other_ar, [&](const std::vector<int>& their) {
      for (std::size_t k = 0; k < others.size(); ++k) {
        choice[static_cast<std::size_t>(others[k])] = their[k];
      }
      worst = std::min(worst, outcome_from(g, g.root(), choice)[static_cast<std::size_t>(i - 1)]);
    });
    best = std::max(best, worst);
  });
  return best;
}

}  // namespace valarena::verify
