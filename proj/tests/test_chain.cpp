#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <memory>
#include <vector>

#include "valarena/arena.hpp"
#include "valarena/chain.hpp"
#include "valarena/errors.hpp"
#include "valarena/game.hpp"
#include "valarena/rational.hpp"
#include "valarena/verify.hpp"

using namespace valarena;

namespace {

LearnerConfig chain_learner(PlayerId p, double delta = 0.0,
                            std::map<std::string, double> by_path = {}) {
  LearnerConfig cfg;
  cfg.player = p;
  cfg.strategy_rule =
      delta > 0.0 ? StrategyRule{StrategyRuleKind::kExploratory, delta}
                  : StrategyRule{StrategyRuleKind::kMyopic, 0.0};
  cfg.revision_rule = RevisionRuleKind::kMemoryless;
  if (!by_path.empty()) {
    cfg.initial.explicit_map = true;
    cfg.initial.by_path = std::move(by_path);
  }
  return cfg;
}

std::map<std::string, double> fig2_v0() {
  return {{"L", 10.0}, {"L/a", 10.0}, {"L/b", -10.0}, {"R", 2.0}};
}

}  // namespace

TEST_CASE("the greedy learner against a uniform opponent walks three states") {
  GameTree g = parse_game(verify::fixture_text("fig1"));
  std::vector<PlayerSpec> players = {chain_learner(1), UniformPolicy{}};
  Chain c = build_chain(g, players);
  REQUIRE(c.states.size() == 3);
  CHECK(c.initial_state == 0);

  auto proj = project_states(g, 1, c.states, {"L", "R"});
  CHECK(proj[0] == std::vector<double>{0, 0});
  // state order: the initial tie, then L rewarded, then R locked in
  REQUIRE(proj.size() == 3);
  std::map<std::vector<double>, int> index;
  for (int s = 0; s < 3; ++s) index[proj[static_cast<std::size_t>(s)]] = s;
  REQUIRE(index.count({0, 0}));
  REQUIRE(index.count({1, 0}));
  REQUIRE(index.count({0, 1}));
  int s00 = index[{0, 0}], s10 = index[{1, 0}], s01 = index[{0, 1}];

  CHECK(c.rows[s00][s00] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(c.rows[s00][s10] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(c.rows[s00][s01] == doctest::Approx(0.50).epsilon(1e-12));
  CHECK(c.rows[s10][s10] == doctest::Approx(0.50).epsilon(1e-12));
  CHECK(c.rows[s10][s00] == doctest::Approx(0.50).epsilon(1e-12));
  CHECK(c.rows[s10][s01] == 0.0);
  CHECK(c.rows[s01][s01] == 1.0);
  CHECK(c.absorbing == std::vector<int>{s01});

  auto absorbed = absorption_probabilities(c, s00);
  CHECK(absorbed.at(s01) == doctest::Approx(1.0).epsilon(1e-12));
  auto from_sink = absorption_probabilities(c, s01);
  CHECK(from_sink.at(s01) == 1.0);

  // every state's value components stay inside {0, 1} for a win-lose game
  for (const auto& st : c.states) {
    for (double v : st) {
      bool ok = v == 0.0 || v == 1.0;
      CHECK(ok);
    }
  }
}

TEST_CASE("exact and numeric transition matrices agree") {
  GameTree g = parse_game(verify::fixture_text("fig1"));
  std::vector<PlayerSpec> players = {chain_learner(1), UniformPolicy{}};
  Chain num = build_chain(g, players);
  Chain from_exact = to_numeric(build_chain_exact(g, players, Rat(0)));
  REQUIRE(num.states.size() == from_exact.states.size());
  CHECK(num.labels == from_exact.labels);
  for (std::size_t u = 0; u < num.rows.size(); ++u) {
    for (std::size_t w = 0; w < num.rows.size(); ++w) {
      CHECK(num.rows[u][w] == doctest::Approx(from_exact.rows[u][w]).epsilon(1e-12));
    }
  }
}

TEST_CASE("rows are stochastic on every bundled game") {
  for (const char* name : {"fig1", "fig2", "gen2p", "gen2p_b", "wl_a", "wl_b"}) {
    GameTree g = parse_game(verify::fixture_text(name));
    std::vector<PlayerSpec> players;
    players.push_back(chain_learner(1, 0.25));
    for (PlayerId p = 2; p <= g.player_count(); ++p) players.push_back(UniformPolicy{});
    Chain c = build_chain(g, players);
    for (const auto& row : c.rows) {
      double sum = 0;
      for (double p : row) {
        sum += p;
        CHECK(p >= 0.0);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("the exploratory one-player example has no absorbing state") {
  GameTree g = parse_game(verify::fixture_text("fig2"));
  std::vector<PlayerSpec> players = {chain_learner(1, 0.2, fig2_v0())};
  Chain c = build_chain(g, players);
  REQUIRE(c.states.size() == 2);
  CHECK(c.absorbing.empty());
  CHECK_THROWS_AS(absorption_probabilities(c, 0), ChainError);

  std::vector<double> pi = stationary_distribution(c);
  CHECK(pi[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pi[1] == doctest::Approx(0.5).epsilon(1e-12));
  // deviation d = delta / 2 = 0.1: mean payoff 6 - 10 d
  CHECK(expected_stationary_payoff(c) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("a bare terminal yields the one-state chain") {
  GameTree g = parse_game("(payoffs 5)");
  std::vector<PlayerSpec> players = {chain_learner(1)};
  Chain c = build_chain(g, players);
  REQUIRE(c.states.size() == 1);
  CHECK(c.rows[0][0] == 1.0);
  CHECK(c.expected_payoff[0] == 5.0);
  CHECK(c.absorbing == std::vector<int>{0});
  CHECK(absorption_probabilities(c, 0).at(0) == 1.0);
}

TEST_CASE("states and transitions do not depend on sibling order") {
  GameTree a = parse_game(verify::fixture_text("fig2"));
  GameTree b = parse_game(
      "(player 1 (move R (payoffs 2)) "
      "(move L (player 1 (move a (payoffs 10)) (move b (payoffs -10)))))");
  std::vector<PlayerSpec> pa = {chain_learner(1, 0.4, fig2_v0())};
  Rat d(1, 5);
  RationalChain ca = build_chain_exact(a, pa, d);
  RationalChain cb = build_chain_exact(b, pa, d);
  REQUIRE(ca.labels.size() == cb.labels.size());
  CHECK(ca.labels == cb.labels);
  CHECK(ca.rows == cb.rows);
  CHECK(ca.expected_payoff == cb.expected_payoff);
  CHECK(stationary_distribution(ca) == stationary_distribution(cb));
}

TEST_CASE("chain occupancy matches a long simulated trajectory") {
  GameTree g = parse_game(verify::fixture_text("fig2"));
  std::vector<PlayerSpec> players = {chain_learner(1, 0.2, fig2_v0())};
  Chain c = build_chain(g, players);
  std::vector<double> pi = stationary_distribution(c);

  ExperimentConfig cfg;
  cfg.game = std::make_shared<const GameTree>(g);
  cfg.players = players;
  cfg.rounds = 100000;
  cfg.base_seed = 2024;
  cfg.normalize();
  cfg.validate();
  TrialRecord rec = run_trial(cfg, 0);

  // replay the valuation state from the terminal sequence: L/a restores the
  // optimistic state, L/b switches to the burned state, R changes nothing
  long long in_initial = 0;
  int state = 0;
  double mean = 0;
  for (long long r = 0; r < cfg.rounds; ++r) {
    if (state == 0) ++in_initial;
    mean += rec.payoffs[0][static_cast<std::size_t>(r)];
    NodeId t = rec.terminals[static_cast<std::size_t>(r)];
    if (t == 2) state = 0;
    if (t == 3) state = 1;
  }
  mean /= static_cast<double>(cfg.rounds);
  double occupancy = static_cast<double>(in_initial) / static_cast<double>(cfg.rounds);
  // two-state chain with switch probability 0.09 each way: the integrated
  // autocorrelation time is about 10, so 3 standard errors is about 0.015
  CHECK(std::abs(occupancy - pi[0]) < 0.016);
  CHECK(std::abs(mean - expected_stationary_payoff(c)) < 0.1);
}

TEST_CASE("absorption happens on the simulated win-lose path too") {
  GameTree g = parse_game(verify::fixture_text("fig1"));
  ExperimentConfig cfg;
  cfg.game = std::make_shared<const GameTree>(g);
  cfg.players = {chain_learner(1), UniformPolicy{}};
  cfg.rounds = 100000;
  cfg.base_seed = 555;
  cfg.normalize();
  cfg.validate();
  TrialRecord rec = run_trial(cfg, 0);
  for (std::size_t r = 1000; r < rec.terminals.size(); ++r) {
    REQUIRE(rec.terminals[r] == 4);
  }
}

TEST_CASE("chain construction rejects unsupported setups") {
  GameTree g = parse_game(verify::fixture_text("fig1"));

  LearnerConfig averaging = chain_learner(1);
  averaging.revision_rule = RevisionRuleKind::kAveraging;
  CHECK_THROWS_AS(build_chain(g, {averaging, UniformPolicy{}}), ValidationError);

  CHECK_THROWS_AS(build_chain(g, {chain_learner(1), AdversarialPolicy{}}), ValidationError);
  CHECK_THROWS_AS(build_chain(g, {UniformPolicy{}, UniformPolicy{}}), ValidationError);
  CHECK_THROWS_AS(build_chain(g, {chain_learner(1), chain_learner(2)}), ValidationError);

  ChainOptions tiny;
  tiny.state_cap = 1;
  CHECK_THROWS_AS(enumerate_states(g, {chain_learner(1), UniformPolicy{}}, tiny), ChainError);

  ChainOptions small;
  small.matrix_cap = 2;
  CHECK_THROWS_AS(build_chain(g, {chain_learner(1), UniformPolicy{}}, small), ChainError);
}

TEST_CASE("stationary analysis refuses a reducible chain") {
  GameTree g = parse_game(verify::fixture_text("fig1"));
  Chain c = build_chain(g, {chain_learner(1), UniformPolicy{}});
  CHECK_THROWS_AS(stationary_distribution(c), ChainError);
}
