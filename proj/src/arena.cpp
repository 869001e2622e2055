#include "valarena/arena.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

namespace valarena {

long long ExperimentConfig::effective_window() const {
  long long w = tail_window > 0 ? tail_window : std::max(100LL, rounds / 5);
  return std::min(w, rounds);
}

void ExperimentConfig::normalize() {
  tail_window = effective_window();
  if (delta_override) {
    for (auto& spec : players) {
      if (auto* lc = std::get_if<LearnerConfig>(&spec)) {
        if (lc->strategy_rule.kind == StrategyRuleKind::kExploratory) {
          lc->strategy_rule.delta = *delta_override;
        }
      }
    }
  }
}

namespace {

std::vector<PlayerId> learner_players(const ExperimentConfig& cfg) {
  std::vector<PlayerId> out;
  for (std::size_t p = 0; p < cfg.players.size(); ++p) {
    if (std::holds_alternative<LearnerConfig>(cfg.players[p])) {
      out.push_back(static_cast<PlayerId>(p + 1));
    }
  }
  return out;
}

// The exploration weight the equilibrium-mixture check compares against:
// the override if given, otherwise the learners' common exploratory delta
// (0 when every learner is myopic).
double spe_reference_delta(const ExperimentConfig& cfg) {
  if (cfg.delta_override) return *cfg.delta_override;
  std::optional<double> found;
  for (const auto& spec : cfg.players) {
    if (const auto* lc = std::get_if<LearnerConfig>(&spec)) {
      if (lc->strategy_rule.kind == StrategyRuleKind::kExploratory) {
        if (found && *found != lc->strategy_rule.delta) {
          throw ValidationError(
              "equilibrium-mixture check needs a single exploration weight; "
              "learners disagree and no override is set");
        }
        found = lc->strategy_rule.delta;
      }
    }
  }
  return found.value_or(0.0);
}

void validate_stationary(const GameTree& g, PlayerId player, const StationaryPolicy& pol) {
  if (pol.strategy.player != player) {
    throw ValidationError("stationary strategy declares player " +
                          std::to_string(pol.strategy.player) + " but sits in seat " +
                          std::to_string(player));
  }
  if (pol.strategy.dist.size() != static_cast<std::size_t>(g.node_count())) {
    throw ValidationError("stationary strategy must cover every node id");
  }
  for (NodeId n : g.decision_nodes()) {
    const auto& row = pol.strategy.dist[static_cast<std::size_t>(n)];
    if (g.node(n).player != player) {
      if (!row.empty()) {
        throw ValidationError("stationary strategy sets node " + std::to_string(n) +
                              ", which player " + std::to_string(player) + " does not own");
      }
      continue;
    }
    if (row.size() != g.node(n).moves.size()) {
      throw ValidationError("stationary strategy at node " + std::to_string(n) +
                            " has the wrong arity");
    }
    double sum = 0;
    for (double p : row) {
      if (!(p >= 0.0)) throw ValidationError("negative probability in stationary strategy");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ValidationError("stationary strategy at node " + std::to_string(n) +
                            " does not sum to 1");
    }
  }
}

void validate_scripted(const GameTree& g, PlayerId player, const ScriptedPolicy& pol) {
  if (pol.sequence.empty()) throw ValidationError("scripted policy needs at least one strategy");
  for (const PureStrategy& s : pol.sequence) {
    if (s.size() != static_cast<std::size_t>(g.node_count())) {
      throw ValidationError("scripted strategy must cover every node id");
    }
    for (NodeId n : g.decision_nodes()) {
      if (g.node(n).player != player) continue;
      int choice = s[static_cast<std::size_t>(n)];
      if (choice < 0 || choice >= static_cast<int>(g.node(n).moves.size())) {
        throw ValidationError("scripted strategy picks an invalid move at node " +
                              std::to_string(n));
      }
    }
  }
}

void validate_learner(const GameTree& g, PlayerId player, const LearnerConfig& lc) {
  if (lc.player != player) {
    throw ValidationError("learner declares player " + std::to_string(lc.player) +
                          " but sits in seat " + std::to_string(player));
  }
  if (lc.strategy_rule.kind == StrategyRuleKind::kExploratory &&
      !(lc.strategy_rule.delta >= 0.0 && lc.strategy_rule.delta <= 1.0)) {
    throw ValidationError("exploration weight must lie in [0, 1]");
  }
  make_initial_valuation(g, player, lc.initial);  // throws on bad move paths
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!game) throw ValidationError("experiment has no game");
  const GameTree& g = *game;
  if (static_cast<int>(players.size()) != g.player_count()) {
    throw ValidationError("experiment declares " + std::to_string(players.size()) +
                          " players but the game has " + std::to_string(g.player_count()));
  }
  if (rounds < 1) throw ValidationError("rounds must be at least 1");
  if (trials < 1) throw ValidationError("trials must be at least 1");
  if (!(epsilon >= 0.0)) throw ValidationError("epsilon must be nonnegative");
  if (jobs < 0) throw ValidationError("jobs must be nonnegative");
  if (delta_override && !(*delta_override >= 0.0 && *delta_override <= 1.0)) {
    throw ValidationError("exploration weight must lie in [0, 1]");
  }

  bool any_adversarial = false;
  for (std::size_t p = 0; p < players.size(); ++p) {
    PlayerId id = static_cast<PlayerId>(p + 1);
    const PlayerSpec& spec = players[p];
    if (const auto* lc = std::get_if<LearnerConfig>(&spec)) validate_learner(g, id, *lc);
    if (const auto* st = std::get_if<StationaryPolicy>(&spec)) validate_stationary(g, id, *st);
    if (const auto* sc = std::get_if<ScriptedPolicy>(&spec)) validate_scripted(g, id, *sc);
    if (std::holds_alternative<AdversarialPolicy>(spec)) any_adversarial = true;
  }

  std::vector<PlayerId> learners = learner_players(*this);
  if (any_adversarial && learners.size() != 1) {
    throw ValidationError("an adversarial opponent requires exactly one learner");
  }
  if (maxmin_player && (*maxmin_player < 1 || *maxmin_player > g.player_count())) {
    throw ValidationError("maxmin player out of range");
  }
  if (spe_check) {
    if (!(spe_check->tolerance > 0.0)) throw ValidationError("mixture tolerance must be positive");
    if (spe_check->min_visits < 0) throw ValidationError("minimum visit count must be nonnegative");
    spe_reference_delta(*this);  // throws when ambiguous
  }

  // Guarantee-style suites assume win-lose payoffs for each learner and
  // payoff-scale initial valuations (no negative seeds).
  if (suite.rfind("thm1", 0) == 0) {
    for (PlayerId lp : learners) {
      const auto& lc = std::get<LearnerConfig>(players[static_cast<std::size_t>(lp - 1)]);
      if (lp == learners.front() && !is_win_lose_for(g, lp)) {
        throw ValidationError("suite '" + suite + "' needs win-lose payoffs for player " +
                              std::to_string(lp));
      }
      if (lc.initial.explicit_map) {
        for (const auto& [path, v] : lc.initial.by_path) {
          if (v < 0.0) {
            throw ValidationError("suite '" + suite + "' needs nonnegative initial values ('" +
                                  path + "' is negative)");
          }
        }
      } else if (lc.initial.constant < 0.0) {
        throw ValidationError("suite '" + suite + "' needs nonnegative initial values");
      }
    }
  }
}

PathRecord play_round(const GameTree& g, const RoundStrategies& profile, TrialRng& rng) {
  PathRecord path;
  NodeId cur = g.root();
  while (!g.node(cur).is_terminal()) {
    const std::vector<double>& probs = profile[static_cast<std::size_t>(cur)];
    int k = rng.sample(probs);
    cur = g.node(cur).moves[static_cast<std::size_t>(k)].child;
    path.moves.push_back(cur);
  }
  path.terminal = cur;
  return path;
}

namespace {

// Expected learner payoff when the learner mixes per `dist` and every other
// player plays to minimize it; fills the minimizers' choices.
double adversarial_value(const GameTree& g, PlayerId learner,
                         const std::vector<std::vector<double>>& dist, NodeId id,
                         PureStrategy& out) {
  const Node& nd = g.node(id);
  if (nd.is_terminal()) return nd.payoffs[static_cast<std::size_t>(learner - 1)];
  if (nd.player == learner) {
    // recurse into zero-probability branches too so the response strategy
    // covers every opponent node, reached or not
    const std::vector<double>& row = dist[static_cast<std::size_t>(id)];
    double acc = 0;
    for (std::size_t k = 0; k < nd.moves.size(); ++k) {
      double v = adversarial_value(g, learner, dist, nd.moves[k].child, out);
      if (row[k] > 0.0) acc += row[k] * v;
    }
    return acc;
  }
  int best = -1;
  double best_value = 0;
  for (std::size_t k = 0; k < nd.moves.size(); ++k) {
    double v = adversarial_value(g, learner, dist, nd.moves[k].child, out);
    if (best < 0 || v < best_value) {
      best = static_cast<int>(k);
      best_value = v;
    }
  }
  out[static_cast<std::size_t>(id)] = best;
  return best_value;
}

}  // namespace

PureStrategy adversarial_response(const GameTree& g, PlayerId learner,
                                  const BehavioralStrategy& declared) {
  if (declared.player != learner) {
    throw ValidationError("declared strategy belongs to player " + std::to_string(declared.player) +
                          ", expected " + std::to_string(learner));
  }
  if (declared.dist.size() != static_cast<std::size_t>(g.node_count())) {
    throw ValidationError("declared strategy must cover every node id");
  }
  for (NodeId n : g.decision_nodes()) {
    if (g.node(n).player == learner &&
        declared.dist[static_cast<std::size_t>(n)].size() != g.node(n).moves.size()) {
      throw ValidationError("declared strategy has the wrong arity at node " + std::to_string(n));
    }
  }
  PureStrategy out(static_cast<std::size_t>(g.node_count()), -1);
  adversarial_value(g, learner, declared.dist, g.root(), out);
  return out;
}

namespace {

void fill_one_hot(std::vector<double>& row, std::size_t arity, int choice) {
  row.assign(arity, 0.0);
  row[static_cast<std::size_t>(choice)] = 1.0;
}

}  // namespace

TrialRecord run_trial(const ExperimentConfig& cfg, long long trial_index) {
  const GameTree& g = *cfg.game;
  const int pc = g.player_count();
  const long long T = cfg.rounds;
  const long long W = cfg.effective_window();
  const long long tail_start = T - W;

  TrialRecord rec;
  rec.seed = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(trial_index));
  rec.rounds = T;
  rec.tail_window = W;
  rec.terminals.resize(static_cast<std::size_t>(T));
  rec.payoffs.assign(static_cast<std::size_t>(pc), std::vector<double>(static_cast<std::size_t>(T)));
  rec.running_mean = rec.payoffs;

  TrialRng rng(rec.seed);

  std::vector<std::unique_ptr<LearnerState>> learners(static_cast<std::size_t>(pc));
  std::vector<long long> scripted_pos(static_cast<std::size_t>(pc), 0);
  bool any_adversarial = false;
  PlayerId sole_learner = 0;
  for (int p = 0; p < pc; ++p) {
    const PlayerSpec& spec = cfg.players[static_cast<std::size_t>(p)];
    if (const auto* lc = std::get_if<LearnerConfig>(&spec)) {
      learners[static_cast<std::size_t>(p)] = std::make_unique<LearnerState>(g, *lc);
      sole_learner = static_cast<PlayerId>(p + 1);
    }
    if (std::holds_alternative<AdversarialPolicy>(spec)) any_adversarial = true;
  }

  // Static rows (uniform and stationary) are filled once; learner, scripted,
  // and adversarial rows are rewritten every round.
  RoundStrategies profile(static_cast<std::size_t>(g.node_count()));
  for (NodeId n : g.decision_nodes()) {
    const Node& nd = g.node(n);
    const PlayerSpec& spec = cfg.players[static_cast<std::size_t>(nd.player - 1)];
    auto& row = profile[static_cast<std::size_t>(n)];
    if (std::holds_alternative<UniformPolicy>(spec)) {
      row.assign(nd.moves.size(), 1.0 / static_cast<double>(nd.moves.size()));
    } else if (const auto* st = std::get_if<StationaryPolicy>(&spec)) {
      row = st->strategy.dist[static_cast<std::size_t>(n)];
    } else {
      row.assign(nd.moves.size(), 0.0);
    }
  }

  for (long long t = 0; t < T; ++t) {
    for (NodeId n : g.decision_nodes()) {
      const Node& nd = g.node(n);
      const PlayerSpec& spec = cfg.players[static_cast<std::size_t>(nd.player - 1)];
      auto& row = profile[static_cast<std::size_t>(n)];
      if (learners[static_cast<std::size_t>(nd.player - 1)]) {
        learners[static_cast<std::size_t>(nd.player - 1)]->fill_distribution(g, n, row);
      } else if (const auto* sc = std::get_if<ScriptedPolicy>(&spec)) {
        const PureStrategy& s =
            sc->sequence[static_cast<std::size_t>(t % static_cast<long long>(sc->sequence.size()))];
        fill_one_hot(row, nd.moves.size(), s[static_cast<std::size_t>(n)]);
      }
    }
    if (any_adversarial) {
      BehavioralStrategy declared;
      declared.player = sole_learner;
      declared.dist = profile;
      PureStrategy response = adversarial_response(g, sole_learner, declared);
      for (NodeId n : g.decision_nodes()) {
        const Node& nd = g.node(n);
        if (std::holds_alternative<AdversarialPolicy>(cfg.players[static_cast<std::size_t>(nd.player - 1)])) {
          fill_one_hot(profile[static_cast<std::size_t>(n)], nd.moves.size(),
                       response[static_cast<std::size_t>(n)]);
        }
      }
    }

    PathRecord path = play_round(g, profile, rng);
    const std::vector<double>& pay = g.node(path.terminal).payoffs;
    rec.terminals[static_cast<std::size_t>(t)] = path.terminal;
    for (int p = 0; p < pc; ++p) {
      rec.payoffs[static_cast<std::size_t>(p)][static_cast<std::size_t>(t)] =
          pay[static_cast<std::size_t>(p)];
    }
    for (auto& learner : learners) {
      if (learner) {
        learner->observe(g, path,
                         pay[static_cast<std::size_t>(learner->config().player - 1)]);
      }
    }
    if (t >= tail_start) {
      NodeId prev = g.root();
      for (NodeId step : path.moves) {
        auto& tc = rec.tail_choices[prev];
        if (tc.counts.empty()) tc.counts.assign(g.node(prev).moves.size(), 0);
        ++tc.visits;
        ++tc.counts[static_cast<std::size_t>(g.sibling_index(step))];
        prev = step;
      }
    }
  }

  for (int p = 0; p < pc; ++p) {
    const auto& pays = rec.payoffs[static_cast<std::size_t>(p)];
    auto& means = rec.running_mean[static_cast<std::size_t>(p)];
    double acc = 0;
    for (long long t = 0; t < T; ++t) {
      acc += pays[static_cast<std::size_t>(t)];
      means[static_cast<std::size_t>(t)] = acc / static_cast<double>(t + 1);
    }
    double tail_acc = 0;
    bool all_win = true;
    for (long long t = tail_start; t < T; ++t) {
      tail_acc += pays[static_cast<std::size_t>(t)];
      all_win = all_win && pays[static_cast<std::size_t>(t)] == 1.0;
    }
    rec.tail_mean.push_back(tail_acc / static_cast<double>(W));
    rec.tail_all_win.push_back(all_win ? 1 : 0);
  }

  std::map<NodeId, long long> terminal_counts;
  for (long long t = tail_start; t < T; ++t) {
    ++terminal_counts[rec.terminals[static_cast<std::size_t>(t)]];
  }
  rec.tail_single_terminal = terminal_counts.size() == 1;
  long long best_count = 0;
  for (const auto& [z, count] : terminal_counts) {
    if (count > best_count) {
      best_count = count;
      rec.tail_modal_terminal = z;
    }
  }
  rec.tail_modal_share = static_cast<double>(best_count) / static_cast<double>(W);

  for (int p = 0; p < pc; ++p) {
    const auto& learner = learners[static_cast<std::size_t>(p)];
    if (!learner) continue;
    LearnerSnapshot snap;
    snap.player = static_cast<PlayerId>(p + 1);
    snap.revision = learner->config().revision_rule;
    for (NodeId move : g.moves_of(snap.player)) {
      snap.moves.push_back(LearnerSnapshotMove{g.label_path(move),
                                               learner->current_valuation().at(g, move),
                                               learner->observation_count(g, move)});
    }
    rec.final_states.push_back(std::move(snap));
  }
  return rec;
}

bool TrialRecord::operator==(const TrialRecord& o) const {
  return seed == o.seed && rounds == o.rounds && tail_window == o.tail_window &&
         terminals == o.terminals && payoffs == o.payoffs && running_mean == o.running_mean &&
         tail_mean == o.tail_mean && tail_all_win == o.tail_all_win &&
         tail_single_terminal == o.tail_single_terminal &&
         tail_modal_terminal == o.tail_modal_terminal && tail_modal_share == o.tail_modal_share &&
         tail_choices == o.tail_choices && final_states == o.final_states;
}

Quantiles summarize_quantiles(std::vector<double> values) {
  Quantiles q;
  if (values.empty()) return q;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  double sum = 0;
  for (double v : values) sum += v;
  auto rank = [&](double p) {
    auto idx = static_cast<std::size_t>(std::llround(p * static_cast<double>(n - 1)));
    return values[std::min(idx, n - 1)];
  };
  q.min = values.front();
  q.p05 = rank(0.05);
  q.p25 = rank(0.25);
  q.median = rank(0.5);
  q.mean = sum / static_cast<double>(n);
  q.p75 = rank(0.75);
  q.p95 = rank(0.95);
  q.max = values.back();
  return q;
}

namespace {

struct TrialStats {
  std::vector<char> all_win;
  std::vector<double> tail_mean;
  bool single_terminal = false;
  double spe_linf = 0;
  std::map<NodeId, TailChoiceCounts> choices;
  std::vector<LearnerSnapshot> states;
  std::string csv;
};

std::string render_csv(const GameTree& g, long long trial, const TrialRecord& rec) {
  std::string out;
  for (long long t = 0; t < rec.rounds; ++t) {
    out += std::to_string(trial);
    out.push_back(',');
    out += std::to_string(t + 1);
    out.push_back(',');
    out += g.label_path(rec.terminals[static_cast<std::size_t>(t)]);
    for (const auto& per_player : rec.payoffs) {
      out.push_back(',');
      out += format_real(per_player[static_cast<std::size_t>(t)]);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, std::ostream* per_round_csv) {
  cfg.validate();
  const GameTree& g = *cfg.game;
  const int pc = g.player_count();
  const long long N = cfg.trials;

  ExperimentReport report;
  report.trials = N;
  report.rounds = cfg.rounds;
  report.tail_window = cfg.effective_window();

  std::optional<double> maxmin_threshold;
  if (cfg.maxmin_player) {
    MaxminResult mm = maxmin(g, *cfg.maxmin_player);
    report.maxmin_player = *cfg.maxmin_player;
    report.maxmin_value = mm.value;
    maxmin_threshold = mm.value - cfg.epsilon;
    report.maxmin_threshold = maxmin_threshold;
  }

  // Reference per-node distributions for the equilibrium-mixture check:
  // (1 - delta) on the unique perfect-equilibrium move plus delta spread
  // uniformly.
  std::map<NodeId, std::vector<double>> mixture_ref;
  if (cfg.spe_check) {
    double delta = spe_reference_delta(cfg);
    report.spe_delta = delta;
    SpeResult spe = solve_spe(g);
    for (NodeId n : g.decision_nodes()) {
      const Node& nd = g.node(n);
      std::vector<double> row(nd.moves.size(),
                              delta / static_cast<double>(nd.moves.size()));
      row[static_cast<std::size_t>(spe.strategy[static_cast<std::size_t>(n)])] += 1.0 - delta;
      mixture_ref[n] = std::move(row);
    }
  }

  if (per_round_csv) {
    *per_round_csv << "trial,round,terminal";
    for (int p = 1; p <= pc; ++p) *per_round_csv << ",payoff_" << p;
    *per_round_csv << "\n";
  }

  std::vector<TrialStats> stats(static_cast<std::size_t>(N));
  std::vector<char> done(static_cast<std::size_t>(N), 0);
  std::atomic<long long> next{0};
  std::mutex mu;
  long long flushed = 0;
  std::exception_ptr failure;

  auto worker = [&]() {
    for (;;) {
      long long i = next.fetch_add(1);
      if (i >= N) return;
      try {
        TrialRecord rec = run_trial(cfg, i);
        TrialStats st;
        st.all_win = rec.tail_all_win;
        st.tail_mean = rec.tail_mean;
        st.single_terminal = rec.tail_single_terminal;
        st.choices = rec.tail_choices;
        if (cfg.spe_check) {
          double linf = 0;
          for (const auto& [n, ref] : mixture_ref) {
            auto it = rec.tail_choices.find(n);
            long long visits = it == rec.tail_choices.end() ? 0 : it->second.visits;
            if (visits < cfg.spe_check->min_visits || visits == 0) continue;
            for (std::size_t k = 0; k < ref.size(); ++k) {
              double freq = static_cast<double>(it->second.counts[k]) / static_cast<double>(visits);
              linf = std::max(linf, std::abs(freq - ref[k]));
            }
          }
          st.spe_linf = linf;
        }
        if (cfg.dump_state) st.states = rec.final_states;
        if (per_round_csv) st.csv = render_csv(g, i, rec);
        std::lock_guard<std::mutex> lock(mu);
        stats[static_cast<std::size_t>(i)] = std::move(st);
        done[static_cast<std::size_t>(i)] = 1;
        while (flushed < N && done[static_cast<std::size_t>(flushed)]) {
          if (per_round_csv) {
            *per_round_csv << stats[static_cast<std::size_t>(flushed)].csv;
            stats[static_cast<std::size_t>(flushed)].csv.clear();
            stats[static_cast<std::size_t>(flushed)].csv.shrink_to_fit();
          }
          ++flushed;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        next.store(N);
        return;
      }
    }
  };

  int jobs = cfg.jobs > 0 ? cfg.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = static_cast<int>(std::min<long long>(jobs, N));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  report.all_win_tail_fraction.assign(static_cast<std::size_t>(pc), 0.0);
  std::vector<std::vector<double>> tails(static_cast<std::size_t>(pc));
  long long single_count = 0;
  long long above_count = 0;
  std::vector<double> linfs;
  std::map<NodeId, TailChoiceCounts> merged;
  for (const TrialStats& st : stats) {
    for (int p = 0; p < pc; ++p) {
      report.all_win_tail_fraction[static_cast<std::size_t>(p)] +=
          st.all_win[static_cast<std::size_t>(p)] ? 1.0 : 0.0;
      tails[static_cast<std::size_t>(p)].push_back(st.tail_mean[static_cast<std::size_t>(p)]);
    }
    if (st.single_terminal) ++single_count;
    if (maxmin_threshold &&
        st.tail_mean[static_cast<std::size_t>(*cfg.maxmin_player - 1)] > *maxmin_threshold) {
      ++above_count;
    }
    if (cfg.spe_check) linfs.push_back(st.spe_linf);
    for (const auto& [n, tc] : st.choices) {
      auto& m = merged[n];
      if (m.counts.empty()) m.counts.assign(tc.counts.size(), 0);
      m.visits += tc.visits;
      for (std::size_t k = 0; k < tc.counts.size(); ++k) m.counts[k] += tc.counts[k];
    }
  }
  for (int p = 0; p < pc; ++p) {
    report.all_win_tail_fraction[static_cast<std::size_t>(p)] /= static_cast<double>(N);
    report.tail_mean.push_back(summarize_quantiles(std::move(tails[static_cast<std::size_t>(p)])));
  }
  report.single_terminal_tail_fraction = static_cast<double>(single_count) / static_cast<double>(N);
  if (maxmin_threshold) {
    report.tail_mean_above_threshold_fraction =
        static_cast<double>(above_count) / static_cast<double>(N);
  }
  if (cfg.spe_check) {
    long long within = 0;
    for (double v : linfs) {
      if (v <= cfg.spe_check->tolerance) ++within;
    }
    report.spe_fraction_within = static_cast<double>(within) / static_cast<double>(N);
    report.spe_linf = summarize_quantiles(std::move(linfs));
  }
  for (const auto& [n, tc] : merged) {
    NodeChoiceSummary summary;
    summary.visits = tc.visits;
    for (long long c : tc.counts) {
      summary.freq.push_back(tc.visits == 0 ? 0.0
                                            : static_cast<double>(c) / static_cast<double>(tc.visits));
    }
    report.tail_choice_freq.emplace(g.label_path(n), std::move(summary));
  }
  if (cfg.dump_state) {
    for (TrialStats& st : stats) report.final_states.push_back(std::move(st.states));
  }
  return report;
}

}  // namespace valarena
