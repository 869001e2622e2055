#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>
#include <string>

#include "valarena/config.hpp"
#include "valarena/errors.hpp"
#include "valarena/game.hpp"
#include "valarena/verify.hpp"

using namespace valarena;

namespace {
const std::string& fig1_text() { return verify::fixture_text("fig1"); }
const std::string& fig2_text() { return verify::fixture_text("fig2"); }
}  // namespace

TEST_CASE("parsing the two-player win-lose tree") {
  GameTree g = parse_game(fig1_text());
  CHECK(g.player_count() == 2);
  CHECK(g.node_count() == 5);
  CHECK(g.decision_nodes().size() == 2);
  CHECK(g.terminal_nodes().size() == 3);
  CHECK(g.node(0).player == 1);
  CHECK(g.node(1).player == 2);
  CHECK(g.node(0).moves[0].label == "L");
  CHECK(g.node(0).moves[1].label == "R");
  CHECK(g.node(2).payoffs == std::vector<double>{1, 0});
  CHECK(g.node(3).payoffs == std::vector<double>{0, 0});
  CHECK(g.node(4).payoffs == std::vector<double>{1, 0});
}

TEST_CASE("bare terminal games") {
  GameTree g = parse_game("(payoffs 5)");
  CHECK(g.player_count() == 1);
  CHECK(g.node_count() == 1);
  CHECK(depth(g) == 0);
  CHECK(g.node(0).is_terminal());
  CHECK(is_generic(g));
  CHECK(serialize_game(g) == "(payoffs 5)");
  GameTree win = parse_game("(payoffs 1)");
  CHECK(is_win_lose_for(win, 1));
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse_game(""), ParseError);
  CHECK_THROWS_AS(parse_game("(payoffs)"), ParseError);
  CHECK_THROWS_AS(parse_game("(player 1)"), ParseError);
  CHECK_THROWS_AS(parse_game("(player 0 (move a (payoffs 1)))"), ParseError);
  CHECK_THROWS_AS(parse_game("(player 1 (move L (payoffs 1)) (move L (payoffs 2)))"), ParseError);
  CHECK_THROWS_AS(parse_game("(player 1 (move L (payoffs 1)) (move R (payoffs 1 2)))"),
                  ParseError);
  CHECK_THROWS_AS(parse_game("(player 1 (move L (payoffs 1))) trailing"), ParseError);
  CHECK_THROWS_AS(parse_game("(player 1 (move L* (payoffs 1)))"), ParseError);
  CHECK_THROWS_AS(parse_game("(player 1 (move L (payoffs 1e3)))"), ParseError);

  try {
    parse_game("(player 1 (move L (payoffs 1)) (move L (payoffs 2)))");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    CHECK(std::string(e.what()).find("1:") != std::string::npos);
  }
}

TEST_CASE("serialization is canonical and round-trips") {
  GameTree g1 = parse_game(fig1_text());
  CHECK(serialize_game(g1) == fig1_text());
  GameTree g2 = parse_game(fig2_text());
  CHECK(serialize_game(g2) == fig2_text());

  // whitespace variations normalize away
  GameTree spaced = parse_game("( player 1\n  (move L (payoffs 1 0))\t(move R (payoffs 0 1)) )");
  CHECK(serialize_game(spaced) == "(player 1 (move L (payoffs 1 0)) (move R (payoffs 0 1)))");

  // non-integer payoffs print as shortest fixed decimals
  GameTree frac = parse_game("(payoffs 0.50)");
  CHECK(serialize_game(frac) == "(payoffs 0.5)");
  CHECK(format_real(2.0) == "2");
  CHECK(format_real(-10.0) == "-10");
  CHECK(format_real(0.25) == "0.25");
}

TEST_CASE("depth") {
  CHECK(depth(parse_game("(payoffs 1)")) == 0);
  CHECK(depth(parse_game(fig1_text())) == 2);
  CHECK(depth(parse_game(fig2_text())) == 2);
  CHECK(depth(parse_game(verify::fixture_text("gen2p"))) == 3);
  CHECK(depth(parse_game(verify::fixture_text("wl_a"))) == 3);
  CHECK(depth(parse_game(verify::fixture_text("wl_b"))) == 3);
}

TEST_CASE("genericity uses exact per-player comparison") {
  CHECK(is_generic(parse_game(fig2_text())));
  CHECK_FALSE(is_generic(parse_game(fig1_text())));
  CHECK(is_generic(parse_game("(payoffs 3 3)")));  // single terminal, vacuous
  CHECK(is_generic(parse_game(verify::fixture_text("gen2p"))));
  // duplicate for player 2 only
  CHECK_FALSE(is_generic(parse_game(
      "(player 1 (move L (payoffs 1 5)) (move R (payoffs 2 5)))")));
}

TEST_CASE("win-lose detection") {
  GameTree g1 = parse_game(fig1_text());
  CHECK(is_win_lose_for(g1, 1));
  CHECK(is_win_lose_for(g1, 2));  // all zeros
  CHECK_FALSE(is_win_lose_for(parse_game(fig2_text()), 1));
  CHECK(is_win_lose_for(parse_game("(payoffs 1)"), 1));
  CHECK(is_win_lose_for(parse_game("(payoffs 0)"), 1));
  CHECK_FALSE(is_win_lose_for(parse_game("(payoffs 0.5)"), 1));
}

TEST_CASE("subgames") {
  GameTree g = parse_game(fig1_text());
  GameTree whole = subgame(g, 0);
  CHECK(serialize_game(whole) == serialize_game(g));

  // the one-shot game after L
  GameTree after_l = subgame(g, 1);
  CHECK(after_l.player_count() == 2);
  CHECK(serialize_game(after_l) == "(player 2 (move a (payoffs 1 0)) (move b (payoffs 0 0)))");

  GameTree leaf = subgame(g, 4);
  CHECK(depth(leaf) == 0);
  CHECK(leaf.node(0).payoffs == std::vector<double>{1, 0});

  CHECK_THROWS_AS(subgame(g, 99), ValidationError);
}

TEST_CASE("move bookkeeping and label paths") {
  GameTree g = parse_game(fig1_text());
  CHECK(g.moves_of(1) == std::vector<NodeId>{1, 4});
  CHECK(g.moves_of(2) == std::vector<NodeId>{2, 3});
  CHECK(g.label_path(0) == "");
  CHECK(g.label_path(1) == "L");
  CHECK(g.label_path(2) == "L/a");
  CHECK(g.label_path(3) == "L/b");
  CHECK(g.label_path(4) == "R");
  CHECK(g.node_at_path("L/a") == 2);
  CHECK(g.node_at_path("") == 0);
  CHECK_THROWS_AS(g.node_at_path("L/zzz"), ValidationError);
  CHECK(g.move_owner(1) == 1);
  CHECK(g.move_owner(2) == 2);
  CHECK(g.sibling_index(4) == 1);

  PathRecord p = g.path_to(3);
  CHECK(p.moves == std::vector<NodeId>{1, 3});
  CHECK(p.terminal == 3);
  PathRecord root_only = parse_game("(payoffs 2)").path_to(0);
  CHECK(root_only.moves.empty());
  CHECK(root_only.terminal == 0);
}

TEST_CASE("structural invariants on random trees") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 300; ++t) {
    verify::GenOptions opt;
    opt.players = 1 + static_cast<int>(rng() % 2);
    opt.max_depth = static_cast<int>(rng() % 4);
    GameTree g = verify::random_game(rng, opt);

    // parse(serialize) is the identity
    GameTree back = parse_game(serialize_game(g));
    CHECK(serialize_game(back) == serialize_game(g));
    CHECK(back.node_count() == g.node_count());

    // terminal count = sum over decision nodes of (children - 1) + 1
    int branching = 0;
    for (NodeId n : g.decision_nodes()) {
      branching += static_cast<int>(g.node(n).moves.size()) - 1;
    }
    CHECK(static_cast<int>(g.terminal_nodes().size()) == branching + 1);

    // subgames below the root are strictly shallower
    for (NodeId n = 1; n < g.node_count(); ++n) {
      CHECK(depth(subgame(g, n)) < depth(g));
    }
  }
}

TEST_CASE("bundled fixture files match the embedded sources exactly") {
  for (const std::string& name : verify::fixture_names()) {
    std::string path = std::string(VALARENA_SOURCE_DIR) + "/figures/" + name + ".game";
    CHECK(read_text_file(path) == verify::fixture_text(name) + "\n");
  }
}
