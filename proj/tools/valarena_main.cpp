#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "valarena/arena.hpp"
#include "valarena/chain.hpp"
#include "valarena/config.hpp"
#include "valarena/errors.hpp"
#include "valarena/game.hpp"
#include "valarena/learning.hpp"
#include "valarena/rational.hpp"
#include "valarena/solvers.hpp"
#include "valarena/verify.hpp"

namespace {

using namespace valarena;
using nlohmann::ordered_json;

std::string now_utc() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream ofs(path, std::ios::binary);
  if (!ofs) throw ValidationError("cannot open output file '" + path + "'");
  ofs << content;
  if (!ofs) throw ValidationError("failed writing output file '" + path + "'");
}

ordered_json strategy_json(const GameTree& g, const PureStrategy& ps) {
  ordered_json o = ordered_json::object();
  for (NodeId n : g.decision_nodes()) {
    int c = static_cast<std::size_t>(n) < ps.size() ? ps[static_cast<std::size_t>(n)] : -1;
    if (c >= 0) o[g.label_path(n)] = g.node(n).moves[static_cast<std::size_t>(c)].label;
  }
  return o;
}

struct SolveArgs {
  std::string game;
  int player = 1;
  bool want_maxmin = false;
  bool want_win = false;
  bool want_spe = false;
};

int run_solve(const SolveArgs& a) {
  GameTree g = parse_game(read_text_file(a.game));
  if (a.player < 1 || a.player > g.player_count()) {
    throw ValidationError("player must lie in [1, " + std::to_string(g.player_count()) + "]");
  }
  bool maxmin_on = a.want_maxmin, win_on = a.want_win, spe_on = a.want_spe;
  if (!maxmin_on && !win_on && !spe_on) maxmin_on = spe_on = true;

  ordered_json out;
  out["game"] = a.game;
  out["player"] = a.player;
  if (maxmin_on) {
    MaxminResult r = maxmin(g, a.player);
    out["maxmin"] = r.value;
    out["maxmin_strategy"] = strategy_json(g, r.witness);
  }
  if (win_on) {
    WinResult r = can_guarantee_win(g, a.player);
    out["can_win"] = r.can_win;
    if (r.can_win) out["win_strategy"] = strategy_json(g, r.witness);
  }
  if (spe_on) {
    SpeResult r = solve_spe(g);
    out["spe_strategy"] = strategy_json(g, r.strategy);
    out["spe_values"] = r.values[0];
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct SimulateArgs {
  std::string config;
  std::optional<long long> trials, rounds, window;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> delta;
  std::optional<double> epsilon;
  std::optional<int> jobs;
  bool dump_state = false;
  bool timestamps = false;
  std::string out_path;
  std::string format = "json";
};

int run_simulate(const SimulateArgs& a) {
  if (!a.out_path.empty() && a.format != "json" && a.format != "csv") {
    throw ValidationError("--format must be json or csv");
  }
  ExperimentConfig cfg = load_experiment_config(a.config);
  if (a.trials) cfg.trials = *a.trials;
  if (a.rounds) cfg.rounds = *a.rounds;
  if (a.window) cfg.tail_window = *a.window;
  if (a.seed) cfg.base_seed = *a.seed;
  if (a.epsilon) cfg.epsilon = *a.epsilon;
  if (a.jobs) cfg.jobs = *a.jobs;
  if (a.delta) cfg.delta_override = Rat::parse(*a.delta).to_double();
  if (a.dump_state) cfg.dump_state = true;
  cfg.normalize();
  cfg.validate();

  ExperimentReport rep;
  if (!a.out_path.empty() && a.format == "csv") {
    std::ofstream ofs(a.out_path, std::ios::binary);
    if (!ofs) throw ValidationError("cannot open output file '" + a.out_path + "'");
    rep = run_experiment(cfg, &ofs);
    if (!ofs) throw ValidationError("failed writing output file '" + a.out_path + "'");
  } else {
    rep = run_experiment(cfg);
  }

  ordered_json report = report_to_json(rep, cfg);
  if (a.timestamps) report["generated_at"] = now_utc();
  if (!a.out_path.empty() && a.format == "json") {
    write_file(a.out_path, report.dump(2) + "\n");
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

struct ChainArgs {
  std::string game;
  int player = 1;
  std::string delta = "0";
  std::string mode = "rational";
  std::string v0 = "0";
  std::string analysis = "auto";
  std::string out_path;
  std::string format = "json";
};

LearnerConfig chain_learner(const ChainArgs& a, const Rat& delta) {
  LearnerConfig lc;
  lc.player = a.player;
  lc.strategy_rule.kind = StrategyRuleKind::kExploratory;
  lc.strategy_rule.delta = delta.to_double();
  lc.revision_rule = RevisionRuleKind::kMemoryless;
  if (a.v0.find('=') == std::string::npos) {
    lc.initial.constant = Rat::parse(a.v0).to_double();
  } else {
    lc.initial.explicit_map = true;
    std::string rest = a.v0;
    while (!rest.empty()) {
      std::size_t comma = rest.find(',');
      std::string item = rest.substr(0, comma);
      rest = comma == std::string::npos ? std::string() : rest.substr(comma + 1);
      std::size_t eq = item.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ValidationError("--v0 entries must look like path=value, got '" + item + "'");
      }
      lc.initial.by_path[item.substr(0, eq)] = Rat::parse(item.substr(eq + 1)).to_double();
    }
  }
  return lc;
}

int run_chain(const ChainArgs& a) {
  if (a.mode != "rational" && a.mode != "numeric") {
    throw ValidationError("--mode must be rational or numeric");
  }
  if (a.analysis != "auto" && a.analysis != "absorption" && a.analysis != "stationary" &&
      a.analysis != "none") {
    throw ValidationError("--analysis must be auto, absorption, stationary, or none");
  }
  if (!a.out_path.empty() && a.format != "json" && a.format != "csv") {
    throw ValidationError("--format must be json or csv");
  }
  auto g = std::make_shared<const GameTree>(parse_game(read_text_file(a.game)));
  if (a.player < 1 || a.player > g->player_count()) {
    throw ValidationError("player must lie in [1, " + std::to_string(g->player_count()) + "]");
  }
  Rat delta = Rat::parse(a.delta);
  if (delta < Rat(0) || delta > Rat(1)) {
    throw ValidationError("delta must lie in [0, 1], got " + delta.str());
  }

  std::vector<PlayerSpec> players;
  for (PlayerId p = 1; p <= g->player_count(); ++p) {
    if (p == a.player) {
      players.push_back(chain_learner(a, delta));
    } else {
      players.push_back(UniformPolicy{});
    }
  }

  bool rational = a.mode == "rational";
  RationalChain rc;
  Chain nc;
  if (rational) {
    rc = build_chain_exact(*g, players, delta);
    nc = to_numeric(rc);
  } else {
    nc = build_chain(*g, players, {});
  }

  ordered_json out;
  out["game"] = a.game;
  out["learner"] = a.player;
  out["delta"] = delta.str();
  out["mode"] = a.mode;
  out["initial_state"] = nc.initial_state;
  ordered_json states = ordered_json::array();
  std::vector<char> is_absorbing(nc.states.size(), 0);
  for (int s : nc.absorbing) is_absorbing[static_cast<std::size_t>(s)] = 1;
  for (std::size_t i = 0; i < nc.states.size(); ++i) {
    ordered_json st;
    st["index"] = i;
    st["label"] = nc.labels[i];
    st["values"] = nc.states[i];
    st["absorbing"] = static_cast<bool>(is_absorbing[i]);
    st["expected_payoff"] = nc.expected_payoff[i];
    states.push_back(std::move(st));
  }
  out["states"] = std::move(states);
  out["matrix"] = nc.rows;
  if (rational) {
    ordered_json exact = ordered_json::array();
    for (const auto& row : rc.rows) {
      ordered_json jr = ordered_json::array();
      for (const Rat& x : row) jr.push_back(x.str());
      exact.push_back(std::move(jr));
    }
    out["matrix_exact"] = std::move(exact);
  }

  std::string analysis = a.analysis;
  if (analysis == "auto") analysis = nc.absorbing.empty() ? "stationary" : "absorption";
  if (analysis == "absorption") {
    ordered_json probs = ordered_json::object();
    if (rational) {
      auto abs = absorption_probabilities(rc, rc.initial_state);
      ordered_json exact = ordered_json::object();
      for (const auto& [state, p] : abs) {
        probs[std::to_string(state)] = p.to_double();
        exact[std::to_string(state)] = p.str();
      }
      out["absorption"] = std::move(probs);
      out["absorption_exact"] = std::move(exact);
    } else {
      auto abs = absorption_probabilities(nc, nc.initial_state);
      for (const auto& [state, p] : abs) probs[std::to_string(state)] = p;
      out["absorption"] = std::move(probs);
    }
  } else if (analysis == "stationary") {
    if (rational) {
      auto pi = stationary_distribution(rc);
      ordered_json numeric = ordered_json::array();
      ordered_json exact = ordered_json::array();
      for (const Rat& x : pi) {
        numeric.push_back(x.to_double());
        exact.push_back(x.str());
      }
      out["stationary"] = std::move(numeric);
      out["stationary_exact"] = std::move(exact);
      out["mean_payoff"] = expected_stationary_payoff(rc).to_double();
    } else {
      out["stationary"] = stationary_distribution(nc);
      out["mean_payoff"] = expected_stationary_payoff(nc);
    }
  }

  if (!a.out_path.empty()) {
    if (a.format == "json") {
      write_file(a.out_path, out.dump(2) + "\n");
    } else {
      std::string csv = "state,label,absorbing,expected_payoff";
      for (std::size_t i = 0; i < nc.states.size(); ++i) csv += ",to_" + std::to_string(i);
      csv += "\n";
      for (std::size_t i = 0; i < nc.states.size(); ++i) {
        csv += std::to_string(i) + "," + nc.labels[i] + "," +
               (is_absorbing[i] ? "1" : "0") + "," + format_real(nc.expected_payoff[i]);
        for (std::size_t j = 0; j < nc.states.size(); ++j) {
          csv += rational ? "," + rc.rows[i][j].str() : "," + format_real(nc.rows[i][j]);
        }
        csv += "\n";
      }
      write_file(a.out_path, csv);
    }
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct VerifyArgs {
  std::string suite = "all";
  std::optional<std::string> delta;
  std::optional<long long> trials, rounds;
  std::optional<int> jobs;
  bool timestamps = false;
};

ordered_json check_json(const verify::CheckResult& r, bool timestamps) {
  ordered_json o;
  o["suite"] = r.name;
  o["pass"] = r.pass;
  o["details"] = r.details;
  o["data"] = r.data;
  if (timestamps) o["seconds"] = r.seconds;
  return o;
}

int run_verify(const VerifyArgs& a) {
  verify::SuiteOptions opt;
  opt.delta = a.delta;
  if (a.trials) opt.trials = *a.trials;
  if (a.rounds) opt.rounds = *a.rounds;
  if (a.jobs) opt.jobs = *a.jobs;

  std::vector<verify::CheckResult> results;
  if (a.suite == "all") {
    results = verify::run_all(opt);
  } else {
    results.push_back(verify::run_suite(a.suite, opt));
  }

  bool all_pass = true;
  for (const auto& r : results) {
    all_pass = all_pass && r.pass;
    std::cerr << r.name << ": " << (r.pass ? "PASS" : "FAIL");
    if (!r.details.empty()) std::cerr << " (" << r.details << ")";
    std::cerr << " [" << r.seconds << "s]\n";
  }

  if (a.suite == "all") {
    ordered_json out;
    out["pass"] = all_pass;
    ordered_json arr = ordered_json::array();
    for (const auto& r : results) arr.push_back(check_json(r, a.timestamps));
    out["results"] = std::move(arr);
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << check_json(results[0], a.timestamps).dump(2) << "\n";
  }
  return all_pass ? 0 : 2;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Valuation-learning simulator and verifier for finite perfect-information games"};
  app.require_subcommand(1);

  SolveArgs sa;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Security level, win guarantee, and backward induction");
  solve_cmd->add_option("game", sa.game, "game file")->required();
  solve_cmd->add_option("--player", sa.player, "player the analysis is for (default 1)");
  solve_cmd->add_flag("--maxmin", sa.want_maxmin, "report the security level");
  solve_cmd->add_flag("--win", sa.want_win, "report whether a win is guaranteed (win-lose games)");
  solve_cmd->add_flag("--spe", sa.want_spe, "report the backward-induction strategy and value");

  SimulateArgs ma;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Run a repeated-play experiment from a config file");
  sim_cmd->add_option("config", ma.config, "experiment config (JSON)")->required();
  sim_cmd->add_option("--trials", ma.trials, "override trial count");
  sim_cmd->add_option("--rounds", ma.rounds, "override rounds per trial");
  sim_cmd->add_option("--seed", ma.seed, "override base seed");
  sim_cmd->add_option("--delta", ma.delta, "override every exploratory learner's exploration weight");
  sim_cmd->add_option("--epsilon", ma.epsilon, "override the security-margin epsilon");
  sim_cmd->add_option("--window", ma.window, "override the tail window");
  sim_cmd->add_option("--jobs", ma.jobs, "worker threads (default: available processors)");
  sim_cmd->add_option("--out", ma.out_path, "write the report (json) or per-round data (csv) here");
  sim_cmd->add_option("--format", ma.format, "output format for --out: json or csv");
  sim_cmd->add_flag("--dump-state", ma.dump_state, "include per-trial final learner states");
  sim_cmd->add_flag("--timestamps", ma.timestamps, "embed the generation time in the report");

  ChainArgs ca;
  CLI::App* chain_cmd = app.add_subcommand("chain", "Exact revision-dynamics Markov chain for one learner");
  chain_cmd->add_option("game", ca.game, "game file")->required();
  chain_cmd->add_option("--player", ca.player, "learner seat (default 1); all other seats play uniformly");
  chain_cmd->add_option("--delta", ca.delta, "exploration weight, rational like 1/5 or decimal (default 0)");
  chain_cmd->add_option("--mode", ca.mode, "arithmetic: rational (exact) or numeric (default rational)");
  chain_cmd->add_option("--v0", ca.v0, "initial valuation: constant, or path=value list like L=10,R=2");
  chain_cmd->add_option("--analysis", ca.analysis, "auto, absorption, stationary, or none (default auto)");
  chain_cmd->add_option("--out", ca.out_path, "write the chain (json) or the matrix (csv) here");
  chain_cmd->add_option("--format", ca.format, "output format for --out: json or csv");

  VerifyArgs va;
  CLI::App* verify_cmd = app.add_subcommand("verify", "Run a named verification suite, or all of them");
  verify_cmd->add_option("suite", va.suite, "suite name, or 'all'");
  verify_cmd->add_option("--delta", va.delta, "example2-chain: single deviation probability, e.g. 1/10");
  verify_cmd->add_option("--trials", va.trials, "override Monte Carlo trial counts (spot checks only)");
  verify_cmd->add_option("--rounds", va.rounds, "override Monte Carlo round counts (spot checks only)");
  verify_cmd->add_option("--jobs", va.jobs, "worker threads for the Monte Carlo suites");
  verify_cmd->add_flag("--timestamps", va.timestamps, "include per-suite timings in the JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (solve_cmd->parsed()) return run_solve(sa);
  if (sim_cmd->parsed()) return run_simulate(ma);
  if (chain_cmd->parsed()) return run_chain(ca);
  return run_verify(va);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
