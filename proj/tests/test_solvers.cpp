#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "valarena/errors.hpp"
#include "valarena/game.hpp"
#include "valarena/solvers.hpp"
#include "valarena/verify.hpp"

using namespace valarena;

TEST_CASE("win guarantee on the bundled win-lose games") {
  GameTree fig1 = parse_game(verify::fixture_text("fig1"));
  WinResult r = can_guarantee_win(fig1, 1);
  CHECK(r.can_win);
  CHECK(r.witness[0] == 1);  // R at the root

  CHECK(can_guarantee_win(parse_game(verify::fixture_text("wl_a")), 1).can_win);
  CHECK(can_guarantee_win(parse_game(verify::fixture_text("wl_b")), 1).can_win);

  CHECK_FALSE(can_guarantee_win(parse_game("(payoffs 0)"), 1).can_win);
  CHECK(can_guarantee_win(parse_game("(payoffs 1)"), 1).can_win);

  // lowering R's payoff to 0 hands the veto to player 2 (play b)
  GameTree variant = parse_game(
      "(player 1 (move L (player 2 (move a (payoffs 1 0)) (move b (payoffs 0 0)))) "
      "(move R (payoffs 0 0)))");
  CHECK_FALSE(can_guarantee_win(variant, 1).can_win);

  // requires win-lose payoffs for the protagonist
  CHECK_THROWS_AS(can_guarantee_win(parse_game(verify::fixture_text("fig2")), 1),
                  ValidationError);
}

TEST_CASE("security levels of the bundled games") {
  CHECK(maxmin(parse_game(verify::fixture_text("fig2")), 1).value == 10.0);
  CHECK(maxmin(parse_game(verify::fixture_text("fig1")), 1).value == 1.0);
  CHECK(maxmin(parse_game("(payoffs 5)"), 1).value == 5.0);
  CHECK(maxmin(parse_game(verify::fixture_text("gen2p_b")), 1).value == 6.0);
  CHECK(maxmin(parse_game(verify::fixture_text("gen2p")), 1).value == 5.0);
  CHECK(maxmin(parse_game(verify::fixture_text("gen2p")), 2).value == 6.0);
}

TEST_CASE("win guarantee coincides with security level 1 on win-lose games") {
  std::mt19937_64 rng(11);
  verify::GenOptions opt;
  opt.win_lose_player1 = true;
  for (int t = 0; t < 400; ++t) {
    opt.players = 1 + static_cast<int>(rng() % 2);
    opt.max_depth = static_cast<int>(rng() % 4);
    GameTree g = verify::random_game(rng, opt);
    CHECK(can_guarantee_win(g, 1).can_win == (maxmin(g, 1).value == 1.0));
  }
}

TEST_CASE("backward induction on the one-player tree") {
  GameTree g = parse_game(verify::fixture_text("fig2"));
  SpeResult r = solve_spe(g);
  CHECK(r.strategy[0] == 0);  // L at the root
  CHECK(r.strategy[1] == 0);  // a inside
  CHECK(r.values[0] == std::vector<double>{10});
}

TEST_CASE("backward induction on a bare terminal") {
  GameTree g = parse_game("(payoffs 4 7)");
  SpeResult r = solve_spe(g);
  CHECK(r.values[0] == std::vector<double>{4, 7});
  for (int c : r.strategy) CHECK(c == -1);
}

TEST_CASE("indifference is reported at the offending node") {
  // player 2 earns 0 either way after L, so its node ties
  GameTree g = parse_game(verify::fixture_text("fig1"));
  CHECK_THROWS_AS(solve_spe(g), TieError);
  try {
    solve_spe(g);
  } catch (const TieError& e) {
    CHECK(e.node == 1);
    std::string msg = e.what();
    CHECK(msg.find("a") != std::string::npos);
    CHECK(msg.find("b") != std::string::npos);
  }
}

TEST_CASE("unique equilibrium of the generic 2-player tree") {
  GameTree g = parse_game(verify::fixture_text("gen2p"));
  SpeResult r = solve_spe(g);
  CHECK(r.values[0] == std::vector<double>{9, 8});
  CHECK(r.strategy[0] == 0);  // L
  CHECK(r.strategy[1] == 0);  // a
  CHECK(r.strategy[2] == 0);  // c
}

TEST_CASE("solvers equal brute-force enumeration on random generic trees") {
  std::mt19937_64 rng(12);
  verify::GenOptions opt;
  opt.generic = true;
  opt.max_decision_nodes = 4;
  for (int t = 0; t < 120; ++t) {
    opt.players = 1 + static_cast<int>(rng() % 2);
    opt.max_depth = static_cast<int>(rng() % 4);
    GameTree g = verify::random_game(rng, opt);
    REQUIRE(is_generic(g));

    auto defs = verify::spe_profiles_by_definition(g);
    REQUIRE(defs.size() == 1);
    SpeResult spe = solve_spe(g);
    for (NodeId n : g.decision_nodes()) {
      CHECK(spe.strategy[static_cast<std::size_t>(n)] == defs[0][static_cast<std::size_t>(n)]);
    }
    for (PlayerId i = 1; i <= g.player_count(); ++i) {
      CHECK(maxmin(g, i).value == verify::maxmin_by_enumeration(g, i));
    }
  }
}
