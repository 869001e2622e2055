#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <vector>

#include "valarena/errors.hpp"
#include "valarena/game.hpp"
#include "valarena/learning.hpp"
#include "valarena/verify.hpp"

using namespace valarena;

namespace {

const GameTree& fig1() {
  static GameTree g = parse_game(verify::fixture_text("fig1"));
  return g;
}

const GameTree& fig2() {
  static GameTree g = parse_game(verify::fixture_text("fig2"));
  return g;
}

}  // namespace

TEST_CASE("greedy distribution splits ties uniformly") {
  // fig1 moves of player 1 are the children after L (node 1) and R (node 4)
  Valuation tied(fig1(), 1, 0.0);
  CHECK(myopic_distribution(fig1(), tied, 0) == std::vector<double>{0.5, 0.5});

  Valuation firm(fig1(), 1, std::map<std::string, double>{{"L", 1.0}, {"R", 0.0}});
  CHECK(myopic_distribution(fig1(), firm, 0) == std::vector<double>{1.0, 0.0});

  GameTree three =
      parse_game("(player 1 (move a (payoffs 0)) (move b (payoffs 0)) (move c (payoffs 0)))");
  Valuation v(three, 1, std::map<std::string, double>{{"a", 2.0}, {"b", 2.0}, {"c", 1.0}});
  CHECK(myopic_distribution(three, v, 0) == std::vector<double>{0.5, 0.5, 0.0});
}

TEST_CASE("greedy distribution rejects foreign nodes") {
  Valuation v(fig1(), 1, 0.0);
  CHECK_THROWS_AS(myopic_distribution(fig1(), v, 1), ValidationError);  // player 2's node
  CHECK_THROWS_AS(myopic_distribution(fig1(), v, 2), ValidationError);  // terminal
}

TEST_CASE("exploratory distribution is the greedy/uniform mixture") {
  Valuation v(fig2(), 1, std::map<std::string, double>{
                             {"L", 10.0}, {"L/a", 10.0}, {"L/b", -10.0}, {"R", 2.0}});
  CHECK(exploratory_distribution(fig2(), v, 0, 0.0) == myopic_distribution(fig2(), v, 0));
  CHECK(exploratory_distribution(fig2(), v, 0, 1.0) == std::vector<double>{0.5, 0.5});
  for (double delta : {0.1, 0.25, 0.5}) {
    std::vector<double> d = exploratory_distribution(fig2(), v, 0, delta);
    CHECK(d[0] == doctest::Approx(1.0 - delta / 2).epsilon(1e-15));
    CHECK(d[1] == doctest::Approx(delta / 2).epsilon(1e-15));
  }
  CHECK_THROWS_AS(exploratory_distribution(fig2(), v, 0, -0.01), ValidationError);
  CHECK_THROWS_AS(exploratory_distribution(fig2(), v, 0, 1.01), ValidationError);
}

TEST_CASE("exploration weight 2d deviates per binary node with probability d") {
  double d = 0.1;
  Valuation v(fig2(), 1, std::map<std::string, double>{
                             {"L", 10.0}, {"L/a", 10.0}, {"L/b", -10.0}, {"R", 2.0}});
  std::vector<double> root = exploratory_distribution(fig2(), v, 0, 2 * d);
  std::vector<double> inner = exploratory_distribution(fig2(), v, 1, 2 * d);
  CHECK(root[0] == doctest::Approx(1 - d).epsilon(1e-15));
  CHECK(root[1] == doctest::Approx(d).epsilon(1e-15));
  // reaching the favorite terminal takes two greedy picks in a row
  CHECK(root[0] * inner[0] == doctest::Approx((1 - d) * (1 - d)).epsilon(1e-15));
}

TEST_CASE("overwrite revision touches exactly the owner's moves on the path") {
  PathRecord take_r{{4}, 4};
  Valuation v0(fig1(), 1, 0.0);
  Valuation v1 = memoryless_revise(fig1(), v0, take_r, 1.0);
  CHECK(v1.at(fig1(), 4) == 1.0);
  CHECK(v1.at(fig1(), 1) == 0.0);

  PathRecord take_lb{{1, 3}, 3};
  Valuation w0(fig1(), 1, std::map<std::string, double>{{"L", 1.0}, {"R", 0.0}});
  Valuation w1 = memoryless_revise(fig1(), w0, take_lb, 0.0);
  CHECK(w1.at(fig1(), 1) == 0.0);
  CHECK(w1.at(fig1(), 4) == 0.0);

  Valuation p2(fig1(), 2, 5.0);
  Valuation p2r = memoryless_revise(fig1(), p2, take_lb, 0.0);
  CHECK(p2r.at(fig1(), 3) == 0.0);
  CHECK(p2r.at(fig1(), 2) == 5.0);

  // the path through R never visits player 2's node
  CHECK(memoryless_revise(fig1(), p2, take_r, 9.0) == p2);
}

TEST_CASE("averaging revision tracks per-move observation means") {
  AveragingState s(Valuation(fig2(), 1, 0.0));
  PathRecord la{{1, 2}, 2};
  PathRecord lb{{1, 3}, 3};
  s = averaging_revise(fig2(), s, la, 10.0);
  s = averaging_revise(fig2(), s, la, 2.0);
  CHECK(s.current(fig2(), 1) == 6.0);
  CHECK(s.current(fig2(), 2) == 6.0);
  CHECK(s.count(fig2(), 1) == 2);
  CHECK(s.count(fig2(), 2) == 2);
  CHECK(s.current(fig2(), 4) == 0.0);  // unobserved: falls back to the initial
  CHECK(s.count(fig2(), 4) == 0);

  s = averaging_revise(fig2(), s, lb, -10.0);
  CHECK(s.current(fig2(), 3) == -10.0);
  CHECK(s.current(fig2(), 1) == doctest::Approx(2.0 / 3).epsilon(1e-15));

  Valuation snap = s.current_valuation(fig2());
  CHECK(snap.at(fig2(), 2) == 6.0);
  CHECK(snap.at(fig2(), 3) == -10.0);
  CHECK(snap.at(fig2(), 4) == 0.0);
}

TEST_CASE("initial valuations from constants and explicit maps") {
  InitialValuation flat;
  flat.constant = 3.0;
  Valuation v = make_initial_valuation(fig1(), 1, flat);
  CHECK(v.at(fig1(), 1) == 3.0);
  CHECK(v.at(fig1(), 4) == 3.0);

  InitialValuation byp;
  byp.explicit_map = true;
  byp.by_path = {{"L", 0.0}, {"R", 1.0}};
  Valuation w = make_initial_valuation(fig1(), 1, byp);
  CHECK(w.at(fig1(), 4) == 1.0);

  InitialValuation missing;
  missing.explicit_map = true;
  missing.by_path = {{"L", 0.0}};
  CHECK_THROWS_AS(make_initial_valuation(fig1(), 1, missing), ValidationError);

  InitialValuation foreign;
  foreign.explicit_map = true;
  foreign.by_path = {{"L", 0.0}, {"R", 1.0}, {"L/a", 2.0}};
  CHECK_THROWS_AS(make_initial_valuation(fig1(), 1, foreign), ValidationError);
}

TEST_CASE("learner state wires rule, revision, and counts together") {
  LearnerConfig cfg;
  cfg.player = 1;
  cfg.strategy_rule = {StrategyRuleKind::kMyopic, 0.0};
  cfg.revision_rule = RevisionRuleKind::kMemoryless;
  cfg.initial.explicit_map = true;
  cfg.initial.by_path = {{"L", 0.0}, {"R", 1.0}};

  LearnerState st(fig1(), cfg);
  std::vector<double> dist;
  st.fill_distribution(fig1(), 0, dist);
  CHECK(dist == std::vector<double>{0.0, 1.0});

  st.observe(fig1(), PathRecord{{4}, 4}, 1.0);
  CHECK(st.current_valuation().at(fig1(), 4) == 1.0);
  CHECK(st.current_valuation().at(fig1(), 1) == 0.0);

  LearnerConfig avg = cfg;
  avg.revision_rule = RevisionRuleKind::kAveraging;
  avg.strategy_rule = {StrategyRuleKind::kExploratory, 0.5};
  LearnerState sa(fig1(), avg);
  CHECK(sa.observation_count(fig1(), 4) == 0);
  sa.observe(fig1(), PathRecord{{4}, 4}, 1.0);
  sa.observe(fig1(), PathRecord{{4}, 4}, 0.0);
  CHECK(sa.observation_count(fig1(), 4) == 2);
  CHECK(sa.current_valuation().at(fig1(), 4) == 0.5);
  sa.fill_distribution(fig1(), 0, dist);
  // greedy on R (0.5 beats 0), mixed with the uniform half
  CHECK(dist[1] == doctest::Approx(0.75).epsilon(1e-15));
}
