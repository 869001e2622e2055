#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "valarena/config.hpp"
#include "valarena/errors.hpp"
#include "valarena/game.hpp"
#include "valarena/verify.hpp"

#ifndef VALARENA_SOURCE_DIR
#error "VALARENA_SOURCE_DIR must point at the repository root"
#endif
#ifndef VALARENA_CLI_PATH
#error "VALARENA_CLI_PATH must point at the built executable"
#endif

using namespace valarena;
using nlohmann::json;

namespace {

std::string source_path(const std::string& rel) {
  return std::string(VALARENA_SOURCE_DIR) + "/" + rel;
}

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  std::string cmd =
      env_prefix + std::string(VALARENA_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.code = status >= 0 && WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string write_temp(const std::string& name, const std::string& content) {
  std::filesystem::path p = std::filesystem::temp_directory_path() / name;
  std::ofstream ofs(p);
  ofs << content;
  REQUIRE(bool(ofs));
  return p.string();
}

json minimal_config(const std::string& game_path) {
  json j;
  j["game"] = game_path;
  j["learners"] = json::array(
      {{{"type", "learner"}, {"strategy_rule", "myopic"}, {"revision_rule", "memoryless"}},
       {{"type", "uniform"}}});
  j["rounds"] = 1000;
  j["trials"] = 2;
  j["base_seed"] = 9;
  return j;
}

}  // namespace

TEST_CASE("a minimal config materializes the documented defaults") {
  std::string path =
      write_temp("valarena_min_cfg.json", minimal_config(source_path("figures/fig1.game")).dump());
  ExperimentConfig cfg = load_experiment_config(path);
  CHECK(cfg.rounds == 1000);
  CHECK(cfg.trials == 2);
  CHECK(cfg.base_seed == 9);
  CHECK(cfg.effective_window() == 200);  // max(100, rounds / 5)
  CHECK(cfg.epsilon == 0.5);
  CHECK_FALSE(cfg.delta_override.has_value());
  CHECK_FALSE(cfg.maxmin_player.has_value());
  CHECK_FALSE(cfg.spe_check.has_value());
}

TEST_CASE("config parsing rejects unknown keys and bad values") {
  json base = minimal_config(source_path("figures/fig1.game"));

  json unknown = base;
  unknown["surprise"] = 1;
  CHECK_THROWS_AS(experiment_config_from_json(unknown, ""), ValidationError);

  json bad_type = base;
  bad_type["learners"][0]["type"] = "bogus";
  CHECK_THROWS_AS(experiment_config_from_json(bad_type, ""), ValidationError);

  json bad_window = base;
  bad_window["tail_window"] = 0;
  CHECK_THROWS_AS(experiment_config_from_json(bad_window, ""), ValidationError);

  json negative_seed = base;
  negative_seed["base_seed"] = -4;
  CHECK_THROWS_AS(experiment_config_from_json(negative_seed, ""), ValidationError);

  json missing_rounds = base;
  missing_rounds.erase("rounds");
  CHECK_THROWS_AS(experiment_config_from_json(missing_rounds, ""), ValidationError);

  // guarantee suites refuse optimistic-to-negative initial valuations
  json thm1 = base;
  thm1["suite"] = "thm1";
  thm1["learners"][0]["initial_valuation"] = -1;
  CHECK_THROWS_AS(experiment_config_from_json(thm1, ""), ValidationError);
  thm1["learners"][0]["initial_valuation"] = 0;
  CHECK_NOTHROW(experiment_config_from_json(thm1, ""));
}

TEST_CASE("every bundled experiment config echoes losslessly") {
  const char* names[] = {"thm1_fig1.json",    "thm1_wl_a.json",     "thm1_wl_b.json",
                         "thm2_gen2p.json",   "thm3_fig2.json",     "thm3_gen2p_b.json",
                         "thm4_generic2p.json"};
  std::string base_dir = source_path("exp");
  for (const char* name : names) {
    CAPTURE(name);
    ExperimentConfig cfg = load_experiment_config(base_dir + "/" + name);
    nlohmann::ordered_json echo = experiment_config_to_json(cfg);
    ExperimentConfig back = experiment_config_from_json(echo, base_dir);
    CHECK(experiment_config_to_json(back) == echo);
  }
}

TEST_CASE("the equilibrium-mixture experiment runs on a generic game") {
  ExperimentConfig cfg = load_experiment_config(source_path("exp/thm4_generic2p.json"));
  CHECK(is_generic(*cfg.game));
  REQUIRE(cfg.spe_check.has_value());
  CHECK(cfg.spe_check->tolerance == 0.03);
  CHECK(cfg.spe_check->min_visits == 50);
}

TEST_CASE("solve reports the security level of the one-player tree") {
  CliResult r = run_cli("solve " + source_path("figures/fig2.game") + " --player 1 --maxmin");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["maxmin"] == 10.0);
  CHECK(j["player"] == 1);
}

TEST_CASE("solve finds the guaranteed win but refuses the tied equilibrium") {
  CliResult win = run_cli("solve " + source_path("figures/fig1.game") + " --win");
  REQUIRE(win.code == 0);
  CHECK(json::parse(win.out)["can_win"] == true);

  CliResult spe = run_cli("solve " + source_path("figures/fig1.game") + " --spe");
  CHECK(spe.code == 2);
}

TEST_CASE("simulate validates overrides before running") {
  CliResult r =
      run_cli("simulate " + source_path("exp/thm1_fig1.json") + " --trials 1 --rounds 0");
  CHECK(r.code == 1);
}

TEST_CASE("simulate output is byte-identical across runs") {
  std::string args =
      "simulate " + source_path("exp/thm1_fig1.json") + " --trials 3 --rounds 60 --jobs 2";
  CliResult a = run_cli(args);
  CliResult b = run_cli(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  json j = json::parse(a.out);
  CHECK(j["config"]["trials"] == 3);
  CHECK(j["config"]["rounds"] == 60);
}

TEST_CASE("the seed priority is flag, then environment, then config") {
  std::string args = "simulate " + source_path("exp/thm1_fig1.json") + " --trials 1 --rounds 10";
  json from_env = json::parse(run_cli(args, "VALARENA_SEED=777 ").out);
  CHECK(from_env["config"]["base_seed"] == 777);
  json from_flag = json::parse(run_cli(args + " --seed 42", "VALARENA_SEED=777 ").out);
  CHECK(from_flag["config"]["base_seed"] == 42);
  json from_config = json::parse(run_cli(args).out);
  CHECK(from_config["config"]["base_seed"] == 90101);

  CliResult bad = run_cli(args, "VALARENA_SEED=pony ");
  CHECK(bad.code == 1);
}

TEST_CASE("simulate writes per-round data as CSV") {
  std::string out = (std::filesystem::temp_directory_path() / "valarena_rounds.csv").string();
  CliResult r = run_cli("simulate " + source_path("exp/thm1_fig1.json") +
                        " --trials 2 --rounds 5 --out " + out + " --format csv");
  REQUIRE(r.code == 0);
  std::ifstream ifs(out);
  std::string header;
  std::getline(ifs, header);
  CHECK(header == "trial,round,terminal,payoff_1,payoff_2");
  int lines = 0;
  for (std::string line; std::getline(ifs, line);) {
    if (!line.empty()) ++lines;
  }
  CHECK(lines == 10);
}

TEST_CASE("chain analysis of the win-lose game absorbs at the winning valuation") {
  CliResult r = run_cli("chain " + source_path("figures/fig1.game"));
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["mode"] == "rational");
  CHECK(j["delta"] == "0");
  REQUIRE(j["states"].size() == 3);
  int sink = -1;
  for (const auto& st : j["states"]) {
    if (st["absorbing"] == true) {
      sink = st["index"].get<int>();
      CHECK(st["label"] == "L=0 R=1");
    }
  }
  REQUIRE(sink >= 0);
  CHECK(j["absorption"][std::to_string(sink)] == 1.0);
  CHECK(j["absorption_exact"][std::to_string(sink)] == "1");
}

TEST_CASE("chain analysis matches the exploratory two-state example") {
  std::string args = "chain " + source_path("figures/fig2.game") +
                     " --delta 1/5 --v0 L=10,L/a=10,L/b=-10,R=2";
  CliResult r = run_cli(args);
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  REQUIRE(j["states"].size() == 2);
  CHECK(j["stationary_exact"] == json::array({"1/2", "1/2"}));
  CHECK(j["matrix_exact"][0][0] == "91/100");
  CHECK(j["matrix_exact"][0][1] == "9/100");
  CHECK(j["mean_payoff"] == 5.0);

  // no state has a unit self-loop, so demanding absorption analysis fails
  CliResult abs = run_cli(args + " --analysis absorption");
  CHECK(abs.code == 2);
}

TEST_CASE("the verification suites run through the command line") {
  CliResult r = run_cli("verify example2-chain --delta 1/10");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["suite"] == "example2-chain");
  CHECK(j["pass"] == true);
  json matrix = j["data"]["checks"][0]["matrix"];
  CHECK(matrix[0][0] == 0.91);
  CHECK(matrix[0][1] == 0.09);
  CHECK(j["data"]["vanishing_exploration_mean"] == 6.0);

  CHECK(run_cli("verify no-such-suite").code == 1);
  CHECK(run_cli("frobnicate").code == 1);
  CHECK(run_cli("verify example2-chain --delta 2/3").code == 1);
}

TEST_CASE("exact chain verification is instant and deterministic") {
  CliResult a = run_cli("verify example1-chain");
  CliResult b = run_cli("verify example1-chain");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  json j = json::parse(a.out);
  CHECK(j["pass"] == true);
  CHECK(j["data"]["absorption_probability"] == 1.0);
}
