#include "valarena/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "valarena/game.hpp"

namespace valarena {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ValidationError(where + ": " + what);
}

const json& field(const json& j, const std::string& where, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) bad(where, "missing required key '" + key + "'");
  return *it;
}

long long int_field(const json& j, const std::string& where) {
  if (!j.is_number_integer()) bad(where, "expected an integer");
  return j.get<long long>();
}

double number_field(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

void reject_unknown_keys(const json& j, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) bad(where, "unknown key '" + it.key() + "'");
  }
}

LearnerConfig learner_from_json(const GameTree& g, const json& j, PlayerId player,
                                const std::string& where) {
  reject_unknown_keys(j, where, {"type", "strategy_rule", "revision_rule", "initial_valuation"});
  LearnerConfig cfg;
  cfg.player = player;
  if (auto it = j.find("strategy_rule"); it != j.end()) {
    if (it->is_string() && it->get<std::string>() == "myopic") {
      cfg.strategy_rule.kind = StrategyRuleKind::kMyopic;
    } else if (it->is_object() && it->contains("exploratory") && it->size() == 1) {
      cfg.strategy_rule.kind = StrategyRuleKind::kExploratory;
      cfg.strategy_rule.delta =
          number_field((*it)["exploratory"], where + ".strategy_rule.exploratory");
    } else {
      bad(where + ".strategy_rule", "expected \"myopic\" or {\"exploratory\": delta}");
    }
  }
  if (auto it = j.find("revision_rule"); it != j.end()) {
    std::string rule = it->is_string() ? it->get<std::string>() : "";
    if (rule == "memoryless") {
      cfg.revision_rule = RevisionRuleKind::kMemoryless;
    } else if (rule == "averaging") {
      cfg.revision_rule = RevisionRuleKind::kAveraging;
    } else {
      bad(where + ".revision_rule", "expected \"memoryless\" or \"averaging\"");
    }
  }
  if (auto it = j.find("initial_valuation"); it != j.end()) {
    if (it->is_number()) {
      cfg.initial.explicit_map = false;
      cfg.initial.constant = it->get<double>();
    } else if (it->is_object()) {
      cfg.initial.explicit_map = true;
      for (auto entry = it->begin(); entry != it->end(); ++entry) {
        cfg.initial.by_path[entry.key()] =
            number_field(entry.value(), where + ".initial_valuation." + entry.key());
      }
    } else {
      bad(where + ".initial_valuation", "expected a number or a move-path map");
    }
  }
  (void)g;
  return cfg;
}

StationaryPolicy stationary_from_json(const GameTree& g, const json& j, PlayerId player,
                                      const std::string& where) {
  reject_unknown_keys(j, where, {"type", "strategy"});
  StationaryPolicy pol;
  pol.strategy.player = player;
  pol.strategy.dist.assign(static_cast<std::size_t>(g.node_count()), {});
  const json& strat = field(j, where, "strategy");
  if (!strat.is_object()) bad(where + ".strategy", "expected a node-path map");
  for (auto it = strat.begin(); it != strat.end(); ++it) {
    NodeId n = kNoNode;
    try {
      n = g.node_at_path(it.key());
    } catch (const ValidationError& e) {
      bad(where + ".strategy", e.what());
    }
    if (g.node(n).is_terminal() || g.node(n).player != player) {
      bad(where + ".strategy", "'" + it.key() + "' is not a decision node of player " +
                                   std::to_string(player));
    }
    if (!it->is_object()) bad(where + ".strategy." + it.key(), "expected a move-label map");
    const Node& nd = g.node(n);
    std::vector<double> row(nd.moves.size(), 0.0);
    std::size_t seen = 0;
    for (auto mv = it->begin(); mv != it->end(); ++mv) {
      bool found = false;
      for (std::size_t k = 0; k < nd.moves.size(); ++k) {
        if (nd.moves[k].label == mv.key()) {
          row[k] = number_field(mv.value(), where + ".strategy." + it.key() + "." + mv.key());
          found = true;
          ++seen;
          break;
        }
      }
      if (!found) {
        bad(where + ".strategy." + it.key(), "no move labeled '" + mv.key() + "'");
      }
    }
    (void)seen;
    pol.strategy.dist[static_cast<std::size_t>(n)] = std::move(row);
  }
  for (NodeId n : g.decision_nodes()) {
    if (g.node(n).player == player && pol.strategy.dist[static_cast<std::size_t>(n)].empty()) {
      bad(where + ".strategy", "missing distribution for node '" + g.label_path(n) + "'");
    }
  }
  return pol;
}

ScriptedPolicy scripted_from_json(const GameTree& g, const json& j, PlayerId player,
                                  const std::string& where) {
  reject_unknown_keys(j, where, {"type", "sequence"});
  ScriptedPolicy pol;
  const json& seq = field(j, where, "sequence");
  if (!seq.is_array() || seq.empty()) bad(where + ".sequence", "expected a non-empty array");
  for (std::size_t s = 0; s < seq.size(); ++s) {
    const std::string swhere = where + ".sequence[" + std::to_string(s) + "]";
    if (!seq[s].is_object()) bad(swhere, "expected a node-path map");
    PureStrategy strat(static_cast<std::size_t>(g.node_count()), -1);
    for (auto it = seq[s].begin(); it != seq[s].end(); ++it) {
      NodeId n = kNoNode;
      try {
        n = g.node_at_path(it.key());
      } catch (const ValidationError& e) {
        bad(swhere, e.what());
      }
      if (g.node(n).is_terminal() || g.node(n).player != player) {
        bad(swhere, "'" + it.key() + "' is not a decision node of player " + std::to_string(player));
      }
      if (!it->is_string()) bad(swhere + "." + it.key(), "expected a move label");
      std::string label = it->get<std::string>();
      const Node& nd = g.node(n);
      int choice = -1;
      for (std::size_t k = 0; k < nd.moves.size(); ++k) {
        if (nd.moves[k].label == label) choice = static_cast<int>(k);
      }
      if (choice < 0) bad(swhere + "." + it.key(), "no move labeled '" + label + "'");
      strat[static_cast<std::size_t>(n)] = choice;
    }
    for (NodeId n : g.decision_nodes()) {
      if (g.node(n).player == player && strat[static_cast<std::size_t>(n)] < 0) {
        bad(swhere, "missing choice for node '" + g.label_path(n) + "'");
      }
    }
    pol.sequence.push_back(std::move(strat));
  }
  return pol;
}

PlayerSpec player_spec_from_json(const GameTree& g, const json& j, PlayerId player) {
  const std::string where = "learners[" + std::to_string(player - 1) + "]";
  if (!j.is_object()) bad(where, "expected an object");
  std::string type = field(j, where, "type").is_string() ? j["type"].get<std::string>() : "";
  if (type == "learner") return learner_from_json(g, j, player, where);
  if (type == "uniform") {
    reject_unknown_keys(j, where, {"type"});
    return UniformPolicy{};
  }
  if (type == "stationary") return stationary_from_json(g, j, player, where);
  if (type == "scripted") return scripted_from_json(g, j, player, where);
  if (type == "adversarial") {
    reject_unknown_keys(j, where, {"type"});
    return AdversarialPolicy{};
  }
  bad(where + ".type",
      "expected one of \"learner\", \"uniform\", \"stationary\", \"scripted\", \"adversarial\"");
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read file '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

ExperimentConfig experiment_config_from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ValidationError("experiment config must be a JSON object");
  reject_unknown_keys(j, "config",
                      {"suite", "game", "learners", "rounds", "trials", "base_seed", "tail_window",
                       "epsilon", "delta", "maxmin_player", "spe_check", "jobs", "dump_state"});
  ExperimentConfig cfg;
  if (auto it = j.find("suite"); it != j.end()) {
    if (!it->is_string()) bad("config.suite", "expected a string");
    cfg.suite = it->get<std::string>();
  }
  const json& game = field(j, "config", "game");
  if (!game.is_string()) bad("config.game", "expected a path string");
  cfg.game_path = game.get<std::string>();
  std::filesystem::path resolved(cfg.game_path);
  if (resolved.is_relative() && !base_dir.empty()) {
    resolved = std::filesystem::path(base_dir) / resolved;
  }
  try {
    cfg.game = std::make_shared<const GameTree>(parse_game(read_text_file(resolved.string())));
  } catch (const ParseError& e) {
    bad("config.game", "'" + resolved.string() + "': " + e.what());
  }

  const json& learners = field(j, "config", "learners");
  if (!learners.is_array()) bad("config.learners", "expected an array, one entry per player");
  if (static_cast<int>(learners.size()) != cfg.game->player_count()) {
    bad("config.learners", "expected " + std::to_string(cfg.game->player_count()) +
                               " entries, got " + std::to_string(learners.size()));
  }
  for (std::size_t p = 0; p < learners.size(); ++p) {
    cfg.players.push_back(
        player_spec_from_json(*cfg.game, learners[p], static_cast<PlayerId>(p + 1)));
  }

  cfg.rounds = int_field(field(j, "config", "rounds"), "config.rounds");
  cfg.trials = int_field(field(j, "config", "trials"), "config.trials");
  const json& seed = field(j, "config", "base_seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    bad("config.base_seed", "expected an unsigned integer");
  }
  if (seed.is_number_integer() && !seed.is_number_unsigned() && seed.get<long long>() < 0) {
    bad("config.base_seed", "expected an unsigned integer");
  }
  cfg.base_seed = seed.get<std::uint64_t>();
  if (auto it = j.find("tail_window"); it != j.end()) {
    cfg.tail_window = int_field(*it, "config.tail_window");
    if (cfg.tail_window < 1) bad("config.tail_window", "must be at least 1");
  }
  if (auto it = j.find("epsilon"); it != j.end()) {
    cfg.epsilon = number_field(*it, "config.epsilon");
  }
  if (auto it = j.find("delta"); it != j.end()) {
    cfg.delta_override = number_field(*it, "config.delta");
  }
  if (auto it = j.find("maxmin_player"); it != j.end()) {
    cfg.maxmin_player = static_cast<PlayerId>(int_field(*it, "config.maxmin_player"));
  }
  if (auto it = j.find("spe_check"); it != j.end()) {
    if (!it->is_object()) bad("config.spe_check", "expected an object");
    reject_unknown_keys(*it, "config.spe_check", {"tolerance", "min_visits"});
    SpeCheckConfig check;
    if (auto f = it->find("tolerance"); f != it->end()) {
      check.tolerance = number_field(*f, "config.spe_check.tolerance");
    }
    if (auto f = it->find("min_visits"); f != it->end()) {
      check.min_visits = int_field(*f, "config.spe_check.min_visits");
    }
    cfg.spe_check = check;
  }
  if (auto it = j.find("jobs"); it != j.end()) {
    cfg.jobs = static_cast<int>(int_field(*it, "config.jobs"));
  }
  if (auto it = j.find("dump_state"); it != j.end()) {
    if (!it->is_boolean()) bad("config.dump_state", "expected a boolean");
    cfg.dump_state = it->get<bool>();
  }
  cfg.normalize();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
  }
  std::string base_dir = std::filesystem::path(path).parent_path().string();
  if (const char* env = std::getenv("VALARENA_SEED")) {
    char* end = nullptr;
    unsigned long long value = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw ValidationError("VALARENA_SEED must be an unsigned integer, got '" + std::string(env) +
                            "'");
    }
    j["base_seed"] = static_cast<std::uint64_t>(value);
  }
  return experiment_config_from_json(j, base_dir);
}

namespace {

ordered_json learner_to_json(const LearnerConfig& cfg) {
  ordered_json j;
  j["type"] = "learner";
  if (cfg.strategy_rule.kind == StrategyRuleKind::kMyopic) {
    j["strategy_rule"] = "myopic";
  } else {
    j["strategy_rule"] = ordered_json{{"exploratory", cfg.strategy_rule.delta}};
  }
  j["revision_rule"] =
      cfg.revision_rule == RevisionRuleKind::kMemoryless ? "memoryless" : "averaging";
  if (cfg.initial.explicit_map) {
    ordered_json map = ordered_json::object();
    for (const auto& [path, value] : cfg.initial.by_path) map[path] = value;
    j["initial_valuation"] = std::move(map);
  } else {
    j["initial_valuation"] = cfg.initial.constant;
  }
  return j;
}

ordered_json player_spec_to_json(const GameTree& g, const PlayerSpec& spec) {
  if (const auto* lc = std::get_if<LearnerConfig>(&spec)) return learner_to_json(*lc);
  if (std::holds_alternative<UniformPolicy>(spec)) return ordered_json{{"type", "uniform"}};
  if (std::holds_alternative<AdversarialPolicy>(spec)) return ordered_json{{"type", "adversarial"}};
  if (const auto* st = std::get_if<StationaryPolicy>(&spec)) {
    ordered_json strat = ordered_json::object();
    for (NodeId n : g.decision_nodes()) {
      const auto& row = st->strategy.dist[static_cast<std::size_t>(n)];
      if (row.empty()) continue;
      ordered_json moves = ordered_json::object();
      for (std::size_t k = 0; k < row.size(); ++k) {
        moves[g.node(n).moves[k].label] = row[k];
      }
      strat[g.label_path(n)] = std::move(moves);
    }
    return ordered_json{{"type", "stationary"}, {"strategy", std::move(strat)}};
  }
  const auto& sc = std::get<ScriptedPolicy>(spec);
  ordered_json seq = ordered_json::array();
  for (const PureStrategy& s : sc.sequence) {
    ordered_json entry = ordered_json::object();
    for (NodeId n : g.decision_nodes()) {
      int choice = s[static_cast<std::size_t>(n)];
      if (choice >= 0) {
        entry[g.label_path(n)] = g.node(n).moves[static_cast<std::size_t>(choice)].label;
      }
    }
    seq.push_back(std::move(entry));
  }
  return ordered_json{{"type", "scripted"}, {"sequence", std::move(seq)}};
}

ordered_json quantiles_to_json(const Quantiles& q) {
  return ordered_json{{"min", q.min}, {"p05", q.p05},   {"p25", q.p25}, {"median", q.median},
                      {"mean", q.mean}, {"p75", q.p75}, {"p95", q.p95}, {"max", q.max}};
}

}  // namespace

ordered_json experiment_config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  if (!cfg.suite.empty()) j["suite"] = cfg.suite;
  j["game"] = cfg.game_path;
  ordered_json players = ordered_json::array();
  for (const PlayerSpec& spec : cfg.players) players.push_back(player_spec_to_json(*cfg.game, spec));
  j["learners"] = std::move(players);
  j["rounds"] = cfg.rounds;
  j["trials"] = cfg.trials;
  j["base_seed"] = cfg.base_seed;
  j["tail_window"] = cfg.effective_window();
  j["epsilon"] = cfg.epsilon;
  if (cfg.delta_override) j["delta"] = *cfg.delta_override;
  if (cfg.maxmin_player) j["maxmin_player"] = *cfg.maxmin_player;
  if (cfg.spe_check) {
    j["spe_check"] =
        ordered_json{{"tolerance", cfg.spe_check->tolerance}, {"min_visits", cfg.spe_check->min_visits}};
  }
  j["jobs"] = cfg.jobs;
  j["dump_state"] = cfg.dump_state;
  return j;
}

ordered_json snapshots_to_json(const std::vector<LearnerSnapshot>& snapshots) {
  ordered_json out = ordered_json::array();
  for (const LearnerSnapshot& snap : snapshots) {
    ordered_json moves = ordered_json::array();
    for (const LearnerSnapshotMove& m : snap.moves) {
      moves.push_back(ordered_json{{"move", m.path}, {"value", m.value}, {"count", m.count}});
    }
    out.push_back(ordered_json{
        {"player", snap.player},
        {"revision", snap.revision == RevisionRuleKind::kMemoryless ? "memoryless" : "averaging"},
        {"moves", std::move(moves)}});
  }
  return out;
}

ordered_json report_to_json(const ExperimentReport& report, const ExperimentConfig& cfg) {
  ordered_json j;
  j["config"] = experiment_config_to_json(cfg);
  j["trials"] = report.trials;
  j["rounds"] = report.rounds;
  j["tail_window"] = report.tail_window;
  j["all_win_tail_fraction"] = report.all_win_tail_fraction;
  j["single_terminal_tail_fraction"] = report.single_terminal_tail_fraction;
  ordered_json tails = ordered_json::array();
  for (const Quantiles& q : report.tail_mean) tails.push_back(quantiles_to_json(q));
  j["tail_mean"] = std::move(tails);
  ordered_json choices = ordered_json::object();
  for (const auto& [path, summary] : report.tail_choice_freq) {
    NodeId n = cfg.game->node_at_path(path);
    ordered_json freq = ordered_json::object();
    for (std::size_t k = 0; k < summary.freq.size(); ++k) {
      freq[cfg.game->node(n).moves[k].label] = summary.freq[k];
    }
    choices[path] = ordered_json{{"visits", summary.visits}, {"freq", std::move(freq)}};
  }
  j["tail_choice_freq"] = std::move(choices);
  if (report.maxmin_player) {
    j["maxmin"] = ordered_json{{"player", *report.maxmin_player},
                               {"value", *report.maxmin_value},
                               {"threshold", *report.maxmin_threshold},
                               {"tail_mean_above_threshold_fraction",
                                *report.tail_mean_above_threshold_fraction}};
  }
  if (report.spe_fraction_within) {
    j["spe_mixture"] = ordered_json{{"delta", *report.spe_delta},
                                    {"tolerance", cfg.spe_check->tolerance},
                                    {"min_visits", cfg.spe_check->min_visits},
                                    {"fraction_within", *report.spe_fraction_within},
                                    {"linf", quantiles_to_json(*report.spe_linf)}};
  }
  if (cfg.dump_state) {
    ordered_json trials = ordered_json::array();
    for (const auto& snaps : report.final_states) trials.push_back(snapshots_to_json(snaps));
    j["final_states"] = std::move(trials);
  }
  return j;
}

}  // namespace valarena
