#pragma once

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "swarm/harness/checkpoint_io.hpp"
#include "swarm/harness/episode.hpp"
#include "swarm/harness/metrics.hpp"
#include "swarm/harness/models.hpp"
#include "swarm/harness/policies.hpp"
#include "swarm/harness/setup.hpp"
#include "swarm/ppo/trainer.hpp"

namespace swarm::harness {

struct Models {
  std::shared_ptr<const DrlModel> drl;
  std::shared_ptr<const RlModel> rl;
  std::string checkpoint;  // path recorded in logs
  std::string digest;
};

inline std::unique_ptr<Policy> make_policy(PolicyKind k, const Models& m) {
  switch (k) {
    case PolicyKind::kPfsmDrl:
      require(m.drl != nullptr, ErrorCode::kMissingCheckpoint, "PFSM-DRL needs a trained model");
      return std::make_unique<DrlPolicy>(*m.drl);
    case PolicyKind::kPfsmRl:
      require(m.rl != nullptr, ErrorCode::kMissingCheckpoint, "PFSM-RL needs a trained model");
      return std::make_unique<RlPolicy>(*m.rl);
    case PolicyKind::kFsm: return std::make_unique<FsmPolicy>();
    case PolicyKind::kIfElse: return std::make_unique<IfElsePolicy>();
    case PolicyKind::kOracle: return std::make_unique<OraclePolicy>();
    case PolicyKind::kIdle: return std::make_unique<IdlePolicy>();
  }
  fail(ErrorCode::kInvalidConfig, "unknown policy");
}

// Scenario re-creation: fixed positions from the config, jittered by the seed.
inline arena::World make_scenario_world(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto& sc = cfg.harness.scenario;
  std::mt19937_64 rng(mix_seed(seed, 21));
  std::uniform_real_distribution<double> u(-sc.position_jitter, sc.position_jitter);
  const auto jitter = [&](std::vector<Vec2> ps) {
    for (Vec2& p : ps) {
      const Vec2 q = p + Vec2{u(rng), u(rng)};
      if (cfg.arena.inside_bounds(q) && !cfg.arena.in_obstacle(q)) p = q;
    }
    return ps;
  };
  const auto red = jitter(sc.red);
  const auto blue = jitter(sc.blue);
  return make_world_at(cfg, red, blue, seed);
}

struct GameSpec {
  std::uint64_t seed{0};
  int red{3};
  int blue{3};
  PolicyKind red_policy{PolicyKind::kFsm};
  PolicyKind blue_policy{PolicyKind::kFsm};
  bool scenario{false};
};

inline EpisodeLog play_game(const ExperimentConfig& cfg, const GameSpec& g, const Models& m) {
  auto red = make_policy(g.red_policy, m);
  auto blue = make_policy(g.blue_policy, m);
  arena::World w = g.scenario ? make_scenario_world(cfg, g.seed) : make_world(cfg, g.red, g.blue, g.seed);
  LogHeader h = make_header(cfg, w, g.seed, *red, *blue);
  h.scenario = g.scenario ? "iv-d" : "random";
  if (learned(g.red_policy) || learned(g.blue_policy)) {
    h.checkpoint = m.checkpoint;
    h.checkpoint_digest = m.digest;
  }
  return run_episode(cfg, std::move(w), *red, *blue, std::move(h));
}

inline int thread_count(const ExperimentConfig& cfg) {
  if (cfg.harness.threads > 0) return cfg.harness.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs f(i) for i in [0, n) on worker threads; results land in index order.
template <class R, class F>
std::vector<R> parallel_map(int n, int threads, F f) {
  std::vector<R> out(static_cast<std::size_t>(n));
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(i);
    return out;
  }
  std::vector<std::future<void>> jobs;
  for (int t = 0; t < threads; ++t)
    jobs.push_back(std::async(std::launch::async, [&, t] {
      for (int i = t; i < n; i += threads) out[static_cast<std::size_t>(i)] = f(i);
    }));
  for (auto& j : jobs) j.get();
  return out;
}

struct GameSummary {
  std::uint64_t seed{0};
  EpisodeMetrics metrics;
  std::optional<Diagnostic> error;
};

// Evaluation game seeds depend only on the run seed and game index, so every policy meets
// the same spawns.
inline std::uint64_t eval_game_seed(const ExperimentConfig& cfg, std::uint64_t run_seed, int game) {
  return mix_seed(cfg.harness.eval_seed_offset + run_seed, static_cast<std::uint64_t>(game));
}

inline std::vector<GameSummary> evaluate(const ExperimentConfig& cfg, PolicyKind red, int team_size,
                                         std::uint64_t run_seed, int games, const Models& m) {
  return parallel_map<GameSummary>(games, thread_count(cfg), [&](int g) {
    GameSpec spec{eval_game_seed(cfg, run_seed, g), team_size, team_size, red, cfg.harness.blue_policy, false};
    const EpisodeLog log = play_game(cfg, spec, m);
    return GameSummary{spec.seed, episode_metrics(log, cfg.harness.jitter_window, cfg.harness.deadlock_dwell),
                       log.error};
  });
}

inline Tally tally(const std::vector<GameSummary>& games) {
  Tally t;
  for (const auto& g : games) t.add(g.metrics.outcome);
  return t;
}

// ---------------------------------------------------------------- training

struct EpisodeStats {
  int episode{0};
  std::uint64_t seed{0};
  double mean_reward{0.0};
  double reward_std{0.0};
  arena::Outcome outcome{arena::Outcome::kOngoing};
  int ticks{0};
  int red_jitter{0};
  int red_deadlock{0};
  int blue_jitter{0};
  int deadlock_indicator{0};
  int samples{0};
  ppo::UpdateStats update;
};

inline std::string training_csv_header() {
  return "episode,game_seed,mean_reward,reward_std,outcome,win,ticks,red_jitter,red_deadlock,blue_jitter,"
         "deadlock_indicator,samples,surrogate,regularizer,critic_loss,clip_fraction,dropped,grad_clips,"
         "nan_restores";
}

inline std::string csv_row(const EpisodeStats& s) {
  std::ostringstream o;
  o << std::setprecision(10) << s.episode << ',' << s.seed << ',' << s.mean_reward << ',' << s.reward_std << ','
    << arena::name(s.outcome) << ',' << (s.outcome == arena::Outcome::kRedWin ? 1 : 0) << ',' << s.ticks << ','
    << s.red_jitter << ',' << s.red_deadlock << ',' << s.blue_jitter << ',' << s.deadlock_indicator << ','
    << s.samples << ',' << s.update.surrogate << ',' << s.update.regularizer << ',' << s.update.critic_loss << ','
    << s.update.clip_fraction << ',' << s.update.dropped << ',' << s.update.grad_clips << ','
    << s.update.nan_restores;
  return o.str();
}

template <class Model>
struct LearnerTraits;

template <>
struct LearnerTraits<DrlModel> {
  using PolicyT = DrlPolicy;
  using Actor = DrlActor;
  static Actor actor(DrlModel& m) { return DrlActor(m.net, m.mask); }
};

template <>
struct LearnerTraits<RlModel> {
  using PolicyT = RlPolicy;
  using Actor = ppo::LinearPolicy;
  static Actor& actor(RlModel& m) { return m.policy; }
};

using ProgressFn = std::function<void(const EpisodeStats&)>;

// One game per episode against the configured blue policy, one PPO update after each game.
template <class Model>
std::vector<EpisodeStats> train(Model& model, const ExperimentConfig& cfg, int team_size, std::uint64_t run_seed,
                                const ProgressFn& progress = {}) {
  using Tr = LearnerTraits<Model>;
  decltype(auto) actor = Tr::actor(model);
  ppo::Trainer<std::remove_reference_t<decltype(actor)>, ppo::MlpValue> trainer(actor, model.critic, cfg.ppo);
  std::mt19937_64 rng(mix_seed(run_seed, 77));
  std::vector<EpisodeStats> curve;
  std::vector<featnet::Tensor*> params = ppo::collect_parameters(actor);
  for (featnet::Tensor* t : ppo::collect_parameters(model.critic)) params.push_back(t);
  const auto window = static_cast<std::size_t>(cfg.harness.keep_best_window);
  std::deque<double> recent;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<Eigen::MatrixXd> best;
  for (int ep = 0; ep < cfg.ppo.episodes; ++ep) {
    const std::uint64_t game_seed = mix_seed(run_seed, 1000 + static_cast<std::uint64_t>(ep));
    arena::World w = make_world(cfg, team_size, team_size, game_seed);
    typename Tr::PolicyT::Rec recorder(model.critic, cfg.reward, cfg.harness.critic_features);
    recorder.begin(static_cast<int>(w.agents.size()));
    typename Tr::PolicyT red(model, &recorder);
    auto blue = make_policy(cfg.harness.blue_policy, Models{});
    LogHeader h = make_header(cfg, w, game_seed, red, *blue);
    const EpisodeLog log = run_episode(cfg, std::move(w), red, *blue, std::move(h));
    require(!log.error, ErrorCode::kNonFinite, "training episode aborted: " + (log.error ? log.error->message : ""));
    auto buffer = recorder.take();
    EpisodeStats s;
    s.episode = ep;
    s.seed = game_seed;
    s.mean_reward = recorder.summary().mean();
    s.reward_std = recorder.summary().stddev();
    s.deadlock_indicator = recorder.summary().deadlock_fired;
    s.samples = static_cast<int>(buffer.size());
    const auto m = episode_metrics(log, cfg.harness.jitter_window, cfg.harness.deadlock_dwell);
    s.outcome = m.outcome;
    s.ticks = m.ticks;
    s.red_jitter = m.team_total(Team::kRed, &AgentMetrics::jitter);
    s.red_deadlock = m.team_total(Team::kRed, &AgentMetrics::deadlock);
    s.blue_jitter = m.team_total(Team::kBlue, &AgentMetrics::jitter);
    if (window > 0) {
      // Snapshot the parameters that just played, before this episode's update.
      recent.push_back(s.mean_reward);
      if (recent.size() > window) recent.pop_front();
      const double score = std::accumulate(recent.begin(), recent.end(), 0.0) / static_cast<double>(recent.size());
      if (recent.size() == window && score > best_score) {
        best_score = score;
        best.clear();
        for (const featnet::Tensor* t : params) best.push_back(t->value);
      }
    }
    s.update = trainer.update(buffer, rng);
    curve.push_back(s);
    if (progress) progress(s);
  }
  for (std::size_t i = 0; i < best.size(); ++i) params[i]->value = best[i];
  return curve;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path);
  out << text;
}

inline std::string training_csv(const std::vector<EpisodeStats>& curve) {
  std::string s = training_csv_header() + "\n";
  for (const auto& e : curve) s += csv_row(e) + "\n";
  return s;
}

// ---------------------------------------------------------------- ablation

struct CellResult {
  PolicyKind policy{PolicyKind::kFsm};
  int team_size{3};
  std::uint64_t seed{0};
  std::vector<EpisodeStats> training;
  std::vector<GameSummary> games;
  Tally tally;
};

// Per-seed model initialisation.
inline ExperimentConfig seeded_config(ExperimentConfig cfg, std::uint64_t run_seed) {
  cfg.network.init_seed = mix_seed(run_seed, 5);
  return cfg;
}

// Trains (if the policy learns) and evaluates one (policy, team size, seed) cell.
inline CellResult run_cell(const ExperimentConfig& base, PolicyKind policy, int team_size, std::uint64_t seed,
                           const std::string& checkpoint_dir = "", const ProgressFn& progress = {}) {
  const ExperimentConfig cfg = seeded_config(base, seed);
  CellResult r{policy, team_size, seed, {}, {}, {}};
  if (!checkpoint_dir.empty()) std::filesystem::create_directories(checkpoint_dir);
  Models m;
  if (policy == PolicyKind::kPfsmDrl) {
    auto model = std::make_shared<DrlModel>(cfg);
    r.training = train(*model, cfg, team_size, seed, progress);
    if (!checkpoint_dir.empty()) {
      m.checkpoint = checkpoint_dir + "/PFSM-DRL_V" + std::to_string(team_size) + "_s" + std::to_string(seed) + ".ckpt";
      const auto c = make_checkpoint(cfg, *model);
      featnet::write_checkpoint_file(c, m.checkpoint);
      m.digest = featnet::hex64(featnet::fnv1a(featnet::encode_checkpoint(c)));
    }
    m.drl = model;
  } else if (policy == PolicyKind::kPfsmRl) {
    auto model = std::make_shared<RlModel>(cfg);
    r.training = train(*model, cfg, team_size, seed, progress);
    if (!checkpoint_dir.empty()) {
      m.checkpoint = checkpoint_dir + "/PFSM-RL_V" + std::to_string(team_size) + "_s" + std::to_string(seed) + ".ckpt";
      const auto c = make_checkpoint(cfg, *model);
      featnet::write_checkpoint_file(c, m.checkpoint);
      m.digest = featnet::hex64(featnet::fnv1a(featnet::encode_checkpoint(c)));
    }
    m.rl = model;
  }
  r.games = evaluate(cfg, policy, team_size, seed, cfg.harness.eval_games, m);
  r.tally = tally(r.games);
  return r;
}

inline std::string summary_csv_header() {
  return "policy,team_size,seed,games,wins,losses,draws,win_rate,red_jitter_mean,red_deadlock_mean,"
         "blue_jitter_mean,final_mean_reward";
}

inline std::string summary_row(const CellResult& c) {
  std::vector<double> jr, dr, jb;
  for (const auto& g : c.games) {
    jr.push_back(g.metrics.team_mean(Team::kRed, &AgentMetrics::jitter));
    dr.push_back(g.metrics.team_mean(Team::kRed, &AgentMetrics::deadlock));
    jb.push_back(g.metrics.team_mean(Team::kBlue, &AgentMetrics::jitter));
  }
  std::ostringstream o;
  o << std::setprecision(10) << name(c.policy) << ',' << c.team_size << ',' << c.seed << ',' << c.tally.games() << ','
    << c.tally.wins << ',' << c.tally.losses << ',' << c.tally.draws << ',' << c.tally.win_rate() << ',' << mean(jr)
    << ',' << mean(dr) << ',' << mean(jb) << ',';
  if (c.training.empty()) o << "";
  else o << c.training.back().mean_reward;
  return o.str();
}

inline std::string games_csv_header() {
  return "policy,team_size,seed,game,game_seed,outcome,ticks,red_jitter,red_deadlock,blue_jitter,blue_deadlock";
}

inline std::string dwell_csv_header() {
  return "policy,team_size,seed,team,Search,Track,Escape,Cooperate,Support";
}

struct AblationOutput {
  std::vector<CellResult> cells;
};

inline AblationOutput run_ablation(const ExperimentConfig& cfg, const std::string& out_dir,
                                   const std::function<void(const std::string&)>& note = {}) {
  std::filesystem::create_directories(out_dir);
  AblationOutput out;
  std::ofstream training(out_dir + "/training.csv"), summary(out_dir + "/summary.csv"), games(out_dir + "/games.csv"),
      dwell(out_dir + "/dwell.csv");
  require(training && summary && games && dwell, ErrorCode::kIo, "cannot write ablation outputs in " + out_dir);
  training << "policy,team_size,seed," << training_csv_header() << '\n';
  summary << summary_csv_header() << '\n';
  games << games_csv_header() << '\n';
  dwell << dwell_csv_header() << '\n';
  for (int size : cfg.harness.team_sizes)
    for (PolicyKind p : cfg.harness.ablation_policies)
      for (std::uint64_t seed : cfg.harness.seeds) {
        CellResult c = run_cell(cfg, p, size, seed, out_dir);
        const std::string prefix = std::string(name(p)) + "," + std::to_string(size) + "," + std::to_string(seed) + ",";
        for (const auto& e : c.training) training << prefix << csv_row(e) << '\n';
        for (std::size_t g = 0; g < c.games.size(); ++g) {
          const auto& m = c.games[g].metrics;
          games << prefix << g << ',' << c.games[g].seed << ',' << arena::name(m.outcome) << ',' << m.ticks << ','
                << m.team_total(Team::kRed, &AgentMetrics::jitter) << ','
                << m.team_total(Team::kRed, &AgentMetrics::deadlock) << ','
                << m.team_total(Team::kBlue, &AgentMetrics::jitter) << ','
                << m.team_total(Team::kBlue, &AgentMetrics::deadlock) << '\n';
        }
        for (Team t : {Team::kRed, Team::kBlue}) {
          std::array<double, pfsm::kNumStates> f{};
          double ticks = 0.0;
          for (const auto& g : c.games)
            for (const auto& a : g.metrics.agents)
              if (a.team == t) {
                for (std::size_t s = 0; s < f.size(); ++s) f[s] += a.dwell.fraction[s] * a.dwell.ticks;
                ticks += a.dwell.ticks;
              }
          dwell << prefix << arena::name(t);
          for (double x : f) dwell << ',' << std::setprecision(10) << (ticks > 0 ? x / ticks : 0.0);
          dwell << '\n';
        }
        summary << summary_row(c) << '\n';
        summary.flush();
        if (note) note(summary_row(c));
        c.games.shrink_to_fit();
        out.cells.push_back(std::move(c));
      }
  return out;
}

// ---------------------------------------------------------------- scenario

struct ScenarioReport {
  EpisodeLog log;
  EpisodeMetrics metrics;
  int blue_track_escape_jitter{0};  // Track/Escape oscillations while both reds were perceived
  double red_jitter_mean{0.0};
  double blue_jitter_mean{0.0};
  int red_deadlock{0};
  bool reds_cooperated{false};
  double red_coop_support_dwell{0.0};
  double blue_coop_support_dwell{0.0};
  bool reproducing{false};
};

// Track <-> Escape A-B-A patterns of one agent, counted only when every opponent alive at the
// pattern's middle run start lies inside the perception radius and there are at least two.
inline int track_escape_jitter_under_pressure(const EpisodeLog& log, arena::AgentId id, int window,
                                              double perception_radius) {
  struct Tick {
    pfsm::StateId s;
    std::size_t rec;
  };
  std::vector<Tick> seq;
  for (std::size_t r = 0; r < log.ticks.size(); ++r) {
    const auto& a = log.ticks[r].agents[static_cast<std::size_t>(id)];
    if (a.acted) seq.push_back({a.behavior, r});
  }
  struct Run {
    pfsm::StateId s;
    int len;
    std::size_t first_rec;
  };
  std::vector<Run> runs;
  for (const auto& t : seq) {
    if (runs.empty() || runs.back().s != t.s) runs.push_back({t.s, 0, t.rec});
    ++runs.back().len;
  }
  const auto pressured = [&](std::size_t rec) {
    const auto& tick = log.ticks[rec];
    const auto& me = tick.agents[static_cast<std::size_t>(id)];
    int near = 0;
    for (const auto& o : tick.agents)
      if (o.team != me.team && o.acted && distance(o.position, me.position) <= perception_radius) ++near;
    return near >= 2;
  };
  using pfsm::StateId;
  int n = 0;
  for (std::size_t k = 1; k + 1 < runs.size(); ++k) {
    const bool te = (runs[k].s == StateId::kTrack && runs[k - 1].s == StateId::kEscape) ||
                    (runs[k].s == StateId::kEscape && runs[k - 1].s == StateId::kTrack);
    if (te && runs[k - 1].s == runs[k + 1].s && runs[k].len + 2 <= window && pressured(runs[k].first_rec)) ++n;
  }
  return n;
}

inline ScenarioReport scenario_iv_d(const ExperimentConfig& cfg, std::uint64_t seed, const Models& m) {
  const auto& sc = cfg.harness.scenario;
  GameSpec g{seed, static_cast<int>(sc.red.size()), static_cast<int>(sc.blue.size()), sc.red_policy, sc.blue_policy,
             true};
  ScenarioReport r;
  r.log = play_game(cfg, g, m);
  r.metrics = episode_metrics(r.log, cfg.harness.jitter_window, cfg.harness.deadlock_dwell);
  r.red_jitter_mean = r.metrics.team_mean(Team::kRed, &AgentMetrics::jitter);
  r.blue_jitter_mean = r.metrics.team_mean(Team::kBlue, &AgentMetrics::jitter);
  r.red_deadlock = r.metrics.team_total(Team::kRed, &AgentMetrics::deadlock);
  for (const auto& a : r.metrics.agents)
    if (a.team == Team::kBlue)
      r.blue_track_escape_jitter += track_escape_jitter_under_pressure(r.log, a.id, cfg.harness.jitter_window,
                                                                       cfg.sensors.perception_radius);
  const auto rd = r.metrics.team_dwell(Team::kRed);
  const auto bd = r.metrics.team_dwell(Team::kBlue);
  r.red_coop_support_dwell = rd[pfsm::index(StateId::kCooperate)] + rd[pfsm::index(StateId::kSupport)];
  r.blue_coop_support_dwell = bd[pfsm::index(StateId::kCooperate)] + bd[pfsm::index(StateId::kSupport)];
  r.reds_cooperated = r.red_coop_support_dwell > 0.0;
  r.reproducing = r.blue_track_escape_jitter >= 1 && r.reds_cooperated;
  return r;
}

// ---------------------------------------------------------------- replay

struct ReplayResult {
  bool identical{false};
  int first_difference{-1};  // 0-based line index
  std::string expected, actual;
};

// Re-simulates a log from its header and compares the text line by line.
inline ReplayResult replay(const std::string& original_text, const Models& m) {
  std::istringstream in(original_text);
  const EpisodeLog original = read_log(in);
  const ExperimentConfig cfg = config_from_json(original.header.config);
  GameSpec g{original.header.seed, original.header.red, original.header.blue,
             parse_policy(original.header.red_policy), parse_policy(original.header.blue_policy),
             original.header.scenario == "iv-d"};
  Models models = m;
  models.checkpoint = original.header.checkpoint;
  models.digest = original.header.checkpoint_digest;
  const std::string again = log_text(play_game(cfg, g, models));
  ReplayResult r;
  std::istringstream a(original_text), b(again);
  std::string la, lb;
  for (int line = 0;; ++line) {
    const bool ha = static_cast<bool>(std::getline(a, la));
    const bool hb = static_cast<bool>(std::getline(b, lb));
    if (!ha && !hb) break;
    if (ha != hb || la != lb) {
      r.first_difference = line;
      r.expected = ha ? la : "<eof>";
      r.actual = hb ? lb : "<eof>";
      return r;
    }
  }
  r.identical = true;
  return r;
}

}  // namespace swarm::harness
