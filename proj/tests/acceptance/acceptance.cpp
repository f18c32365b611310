#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support/dwa_oracle.hpp"
#include "../support/featnet_toy.hpp"
#include "../support/reference_ppo.hpp"
#include "swarm/arena/geometry.hpp"
#include "swarm/harness/checkpoint_io.hpp"
#include "swarm/harness/experiments.hpp"
#include "swarm/ppo/reward.hpp"

using namespace swarm;
using namespace swarm::harness;
using pfsm::StateId;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass{false};
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- 1: sensing sectors

// Membership of q in {p : |p - o| <= r and the angle between v and p - o is at most half the
// aperture}, evaluated with polar angles instead of a dot product. A full circle needs no
// heading; any narrower sector needs a moving observer and a distinct target point.
bool in_sector_oracle(Vec2 o, Vec2 v, Vec2 q, double r, double aperture) {
  const double dx = q.x - o.x, dy = q.y - o.y;
  if (std::hypot(dx, dy) > r) return false;
  if (aperture >= 2.0 * M_PI) return true;
  if ((v.x == 0.0 && v.y == 0.0) || (dx == 0.0 && dy == 0.0)) return false;
  const double off = std::remainder(std::atan2(dy, dx) - std::atan2(v.y, v.x), 2.0 * M_PI);
  return std::abs(off) <= 0.5 * aperture;
}

Verdict geometry_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pos(0.0, 6.0), vel(-1.5, 1.5), unit(0.0, 1.0);
  int mismatches = 0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    arena::SensorSpec spec;
    spec.attack_radius = 0.5 + 2.0 * unit(rng);
    spec.perception_radius = spec.attack_radius + 0.1 + 2.0 * unit(rng);
    spec.attack_angle = (10.0 + 170.0 * unit(rng)) * M_PI / 180.0;
    spec.perception_angle = unit(rng) < 0.5 ? 2.0 * M_PI : spec.attack_angle + (2.0 * M_PI - spec.attack_angle) * unit(rng);
    arena::AgentState a, b;
    a.id = 0;
    b.id = 1;
    a.position = {pos(rng), pos(rng)};
    b.position = {pos(rng), pos(rng)};
    a.velocity = unit(rng) < 0.1 ? Vec2{0.0, 0.0} : Vec2{vel(rng), vel(rng)};
    b.velocity = {vel(rng), vel(rng)};
    a.alive = unit(rng) > 0.05;
    b.alive = unit(rng) > 0.05;
    const bool both = a.alive && b.alive;
    const bool sees = both && in_sector_oracle(a.position, a.velocity, b.position, spec.perception_radius, spec.perception_angle);
    const bool hits = both && (a.velocity.x != 0.0 || a.velocity.y != 0.0) &&
                      in_sector_oracle(a.position, a.velocity, b.position, spec.attack_radius, spec.attack_angle);
    if (arena::in_perception(a, b, spec) != sees) ++mismatches;
    if (arena::in_attack_sector(a, b, spec) != hits) ++mismatches;
  }
  const double sec = seconds_since(t0);
  return {mismatches == 0 && sec < 5.0, fmt("%d mismatches over %d configurations, %.3f s (limit 5 s)", mismatches, n, sec)};
}

// ---------------------------------------------------------------- 2: gradients

Verdict gradient_fidelity() {
  const auto t0 = Clock::now();
  featnet::CompoundNetwork net(ref::toy_config(true));
  const auto h = ref::toy_history(1, 4, 7);
  const auto f = featnet::preprocess(h, 0, net.config().features);
  const auto errs = ref::gradient_errors(net, f, ref::random_state(4, 2), {});
  double worst = 0.0;
  std::string where;
  for (const auto& [name, e] : errs)
    if (e >= worst) {
      worst = e;
      where = name;
    }
  const double sec = seconds_since(t0);
  return {worst < 1e-4 && sec < 60.0 && !errs.empty(),
          fmt("%zu parameter groups, worst relative error %.2e (%s), %.2f s (limit 1e-4, 60 s)", errs.size(), worst,
              where.c_str(), sec)};
}

// ---------------------------------------------------------------- 3: stochastic rows

Verdict stochastic_rows() {
  const auto t0 = Clock::now();
  featnet::CompoundNetwork net(ref::toy_config(false));
  std::vector<featnet::FeatureFrame> frames;
  for (int k = 0; k < 16; ++k) {
    const auto h = ref::toy_history(1 + k % 3, 1 + k % 4, 500 + k);
    frames.push_back(featnet::preprocess(h, k % (1 + k % 3), net.config().features));
  }
  std::mt19937_64 rng(77);
  std::bernoulli_distribution keep(0.6);
  std::uniform_int_distribution<int> pick(0, 4);
  double worst_sum = 0.0;
  int masked_nonzero = 0, bad_entries = 0;
  const int n = 100000;
  featnet::StreamState s = net.initial_state();
  for (int k = 0; k < n; ++k) {
    pfsm::TopologyMask mask;
    for (StateId a : pfsm::kAllStates) {
      for (StateId b : pfsm::kAllStates) mask.set(a, b, keep(rng));
      if (!mask.row_has_edge(a)) mask.set(a, pfsm::state_from_index(static_cast<std::size_t>(pick(rng))), true);
    }
    const auto out = net.forward(frames[static_cast<std::size_t>(k) % frames.size()], s, mask);
    s = k % 50 == 49 ? net.initial_state() : out.next;
    for (StateId a : pfsm::kAllStates) {
      double sum = 0.0;
      for (StateId b : pfsm::kAllStates) {
        const double v = out.p(a, b);
        if (!mask.allowed(a, b) && v != 0.0) ++masked_nonzero;
        if (!(v >= 0.0 && v <= 1.0)) ++bad_entries;
        sum += v;
      }
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
  }
  return {worst_sum <= 1e-6 && masked_nonzero == 0 && bad_entries == 0,
          fmt("%d passes, worst |row sum - 1| = %.2e, %d nonzero masked entries, %d out-of-range entries, %.1f s", n,
              worst_sum, masked_nonzero, bad_entries, seconds_since(t0))};
}

// ---------------------------------------------------------------- 4: reference PPO

Verdict ppo_reduction() {
  const auto r = ref::compare_chain_ppo(50, 12);
  const double worst = std::max(r.max_actor_diff, r.max_critic_diff);
  return {r.updates == 50 && worst <= 1e-10,
          fmt("%d updates, worst actor diff %.2e, worst critic diff %.2e (limit 1e-10)", r.updates, r.max_actor_diff,
              r.max_critic_diff)};
}

// ---------------------------------------------------------------- 5: reward

bool within_ulps(double x, double target, int ulps) {
  double lo = target, hi = target;
  for (int i = 0; i < ulps; ++i) {
    lo = std::nextafter(lo, -INFINITY);
    hi = std::nextafter(hi, INFINITY);
  }
  return x >= lo && x <= hi;
}

Verdict reward_suite() {
  std::vector<std::string> failures;
  ppo::RewardConfig base;
  base.deadlock_weight = base.jitter_weight = 0.0;
  base.action_cost.fill(0.0);

  // Pure progress.
  {
    pfsm::Matrix5 m = pfsm::Matrix5::Zero();
    m(0, 1) = 1.0;
    for (int r = 1; r < 5; ++r) m(r, r) = 1.0;
    const pfsm::TransitionMatrix p(m);
    ppo::RewardInputs in;
    in.current = StateId::kSearch;
    in.next = StateId::kTrack;
    in.goal = StateId::kTrack;
    in.p = &p;
    if (ppo::compute_reward(in, base).total != 1.0) failures.push_back("pure progress");
  }
  // Self-loop-only row at Support with a zero threshold fires the indicator.
  {
    pfsm::Matrix5 m = pfsm::Matrix5::Identity();
    const pfsm::TransitionMatrix p(m);
    ppo::RewardConfig c = base;
    c.deadlock_threshold = 0.0;
    c.deadlock_penalty = 2.5;
    ppo::RewardInputs in;
    in.current = StateId::kCooperate;
    in.next = StateId::kSupport;
    in.goal = StateId::kSearch;
    in.p = &p;
    const auto t = ppo::compute_reward(in, c);
    if (!t.deadlock_fired || t.deadlock != 2.5) failures.push_back("deadlock indicator");
    m(4, 3) = 1e-9;
    m(4, 4) = 1.0 - 1e-9;
    const pfsm::TransitionMatrix q(m);
    in.p = &q;
    if (ppo::compute_reward(in, c).deadlock_fired) failures.push_back("indicator fired with outgoing mass");
  }
  // Window variance: 0.16 is not representable, so "exact" means within two ulps of it.
  {
    const std::vector<double> w{0.9, 0.1, 0.9, 0.1};
    ppo::RewardConfig c = base;
    c.jitter_penalty = 3.0;
    pfsm::TransitionMatrix p;
    ppo::RewardInputs in;
    in.goal = StateId::kSearch;
    in.p = &p;
    in.edge_window = w;
    const auto t = ppo::compute_reward(in, c);
    if (!within_ulps(t.edge_variance, 0.16, 2) || t.jitter != 3.0 * t.edge_variance)
      failures.push_back(fmt("window variance %.17g", t.edge_variance));
  }
  // Decomposition identities on random inputs.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> st(0, 4);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    pfsm::Matrix5 m;
    for (int r = 0; r < 5; ++r) {
      for (int c = 0; c < 5; ++c) m(r, c) = u(rng) < 0.2 ? 0.0 : u(rng);
      if (m.row(r).sum() == 0.0) m(r, r) = 1.0;
      m.row(r) /= m.row(r).sum();
    }
    const pfsm::TransitionMatrix p(m);
    std::vector<double> window(static_cast<std::size_t>(2 + st(rng)));
    for (double& x : window) x = u(rng);
    std::vector<pfsm::Action> acts{pfsm::Action::kLaunchMissiles};
    ppo::RewardConfig c;
    c.deadlock_weight = u(rng);
    c.jitter_weight = u(rng);
    c.goal_reward = 2.0 * u(rng);
    c.deadlock_penalty = u(rng);
    c.jitter_penalty = u(rng);
    c.deadlock_threshold = 0.1 * u(rng);
    c.action_cost[static_cast<std::size_t>(pfsm::Action::kLaunchMissiles)] = 0.05 * u(rng);
    ppo::RewardInputs in;
    in.current = pfsm::state_from_index(static_cast<std::size_t>(st(rng)));
    in.next = pfsm::state_from_index(static_cast<std::size_t>(st(rng)));
    in.goal = pfsm::state_from_index(static_cast<std::size_t>(st(rng)));
    in.executed_actions = acts;
    in.p = &p;
    in.edge_window = window;
    const auto full = ppo::compute_reward(in, c);

    ppo::RewardConfig no_pen = c;
    no_pen.deadlock_weight = no_pen.jitter_weight = 0.0;
    const double task = ppo::compute_reward(in, no_pen).total;
    worst = std::max(worst, std::abs(task - full.task));

    ppo::RewardConfig pen_only = c;
    pen_only.goal_reward = 0.0;
    pen_only.action_cost.fill(0.0);
    const double pens = ppo::compute_reward(in, pen_only).total;
    worst = std::max(worst, std::abs(pens - (-c.deadlock_weight * full.deadlock - c.jitter_weight * full.jitter)));
    worst = std::max(worst, std::abs(full.total - (task + pens)));
  }
  if (worst > 1e-12) failures.push_back(fmt("decomposition gap %.2e", worst));
  std::string detail = fmt("fixtures exact, decomposition worst gap %.2e over 10000 draws (limit 1e-12)", worst);
  if (!failures.empty()) {
    detail = "failed:";
    for (const auto& f : failures) detail += " [" + f + "]";
  }
  return {failures.empty(), detail};
}

// ---------------------------------------------------------------- 6-8: trained policies

struct LearnedRuns {
  std::map<PolicyKind, std::vector<double>> win_rates;
  double drl_first_win_rate{0.0};
  int drl_first_games{0};
  int drl_first_episodes{0};
  double drl_first_train_seconds{0.0};
  std::string drl_first_checkpoint;
};

LearnedRuns run_v3_cells(const ExperimentConfig& cfg, const std::string& dir) {
  LearnedRuns out;
  const std::uint64_t first = cfg.harness.seeds.front();
  for (PolicyKind p : {PolicyKind::kPfsmDrl, PolicyKind::kPfsmRl, PolicyKind::kFsm, PolicyKind::kIfElse})
    for (std::uint64_t seed : cfg.harness.seeds) {
      const auto t0 = Clock::now();
      double train_sec = 0.0;
      const auto progress = [&](const EpisodeStats& s) {
        if (s.episode + 1 == cfg.ppo.episodes) train_sec = seconds_since(t0);
      };
      const CellResult c = run_cell(cfg, p, 3, seed, dir, progress);
      out.win_rates[p].push_back(c.tally.win_rate());
      std::cerr << "  " << summary_row(c) << " (" << fmt("%.0f", seconds_since(t0)) << " s)\n";
      if (p == PolicyKind::kPfsmDrl && seed == first) {
        out.drl_first_win_rate = c.tally.win_rate();
        out.drl_first_games = c.tally.games();
        out.drl_first_episodes = static_cast<int>(c.training.size());
        out.drl_first_train_seconds = train_sec;
        out.drl_first_checkpoint = dir + "/PFSM-DRL_V3_s" + std::to_string(seed) + ".ckpt";
      }
    }
  return out;
}

Verdict ordering(const ExperimentConfig& cfg, const LearnedRuns& r) {
  const auto m = [&](PolicyKind p) { return mean(r.win_rates.at(p)); };
  const double drl = m(PolicyKind::kPfsmDrl), rl = m(PolicyKind::kPfsmRl), fsm = m(PolicyKind::kFsm),
               ie = m(PolicyKind::kIfElse);
  return {drl > rl && rl > fsm && fsm > ie,
          fmt("V3, %zu seeds x %d games, mean win rates PFSM-DRL %.3f, PFSM-RL %.3f, FSM %.3f, IfElse %.3f",
              cfg.harness.seeds.size(), cfg.harness.eval_games, drl, rl, fsm, ie)};
}

Verdict win_target(const LearnedRuns& r) {
  const bool ok = r.drl_first_win_rate >= 0.7 && r.drl_first_games >= 50 && r.drl_first_episodes <= 100 &&
                  r.drl_first_train_seconds <= 7200.0;
  return {ok, fmt("PFSM-DRL V3 first seed: win rate %.3f over %d games after %d episodes, training %.0f s "
                  "(need >= 0.7, <= 100 episodes, <= 7200 s)",
                  r.drl_first_win_rate, r.drl_first_games, r.drl_first_episodes, r.drl_first_train_seconds)};
}

Verdict scenario_jitter(const std::string& checkpoint) {
  const LoadedModel m = load_model(checkpoint);
  Models models;
  models.drl = m.drl;
  models.checkpoint = checkpoint;
  models.digest = m.digest;
  std::vector<double> red, blue;
  int deadlocks = 0, errors = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ScenarioReport r = scenario_iv_d(m.config, seed, models);
    if (r.log.error) ++errors;
    red.push_back(r.red_jitter_mean);
    blue.push_back(r.blue_jitter_mean);
    deadlocks += r.red_deadlock;
  }
  const double mr = mean(red), mb = mean(blue);
  return {mr < mb && deadlocks == 0 && errors == 0,
          fmt("20 seeds: mean PFSM-DRL red jitter %.2f vs FSM blue %.2f per agent, red deadlocks %d, aborted %d", mr,
              mb, deadlocks, errors)};
}

// ---------------------------------------------------------------- 9: determinism

ExperimentConfig small_config() {
  ExperimentConfig c = default_config();
  c.arena.max_ticks = 120;
  c.ppo.max_steps = 120;
  c.network.features.max_ticks = 120;
  c.network.features.window = 4;
  c.network.conv_channels = 4;
  c.network.embed = 8;
  c.network.stream_out = 6;
  c.network.hidden = 16;
  c.harness.critic_hidden = 8;
  c.ppo.episodes = 3;
  c.harness.eval_games = 4;
  return c;
}

struct RunArtifacts {
  std::string training_csv, summary, checkpoint, logs;
};

RunArtifacts deterministic_run(const std::string& dir) {
  const ExperimentConfig cfg = small_config();
  fs::create_directories(dir);
  const CellResult c = run_cell(cfg, PolicyKind::kPfsmDrl, 3, 11, dir);
  RunArtifacts a;
  a.training_csv = training_csv(c.training);
  a.summary = summary_row(c);
  const std::string ck = dir + "/PFSM-DRL_V3_s11.ckpt";
  a.checkpoint = featnet::read_file_bytes(ck, ErrorCode::kIo);
  const LoadedModel m = load_model(ck);
  Models models;
  models.drl = m.drl;
  models.checkpoint = ck;
  models.digest = m.digest;
  for (int g = 0; g < 3; ++g) {
    GameSpec spec{eval_game_seed(m.config, 11, g), 3, 3, PolicyKind::kPfsmDrl, PolicyKind::kFsm, false};
    a.logs += log_text(play_game(m.config, spec, models));
  }
  return a;
}

Verdict determinism(const std::string& dir) {
  // Both runs use the same checkpoint path so the logged file name cannot differ.
  const std::string path = dir + "/run";
  fs::remove_all(path);
  const RunArtifacts a = deterministic_run(path);
  fs::remove_all(path);
  const RunArtifacts b = deterministic_run(path);
  std::vector<std::string> diff;
  if (a.training_csv != b.training_csv) diff.push_back("training CSV");
  if (a.summary != b.summary) diff.push_back("summary CSV");
  if (a.checkpoint != b.checkpoint) diff.push_back("checkpoint");
  if (a.logs != b.logs) diff.push_back("EpisodeLog");
  std::string detail = fmt("two runs: %zu log bytes, %zu CSV bytes, %zu checkpoint bytes", a.logs.size(),
                           a.training_csv.size() + a.summary.size(), a.checkpoint.size());
  if (!diff.empty()) {
    detail += "; differ in";
    for (const auto& d : diff) detail += " " + d;
  } else {
    detail += ", all identical";
  }
  return {diff.empty() && !a.logs.empty(), detail};
}

// ---------------------------------------------------------------- 10: DWA

Verdict dwa_conformance() {
  arena::ArenaConfig arena;
  arena.obstacles.push_back(arena::ConvexPolygon::rectangle(8, 4, 10, 9));
  arena.obstacles.push_back(arena::ConvexPolygon({{14, 2}, {17, 3}, {15, 6}}));
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> ux(0.1, 21.9), uy(0.1, 14.9), ua(-M_PI, M_PI);
  int outside = 0, mismatches = 0, emergencies = 0;
  nav::DwaConfig c;
  std::uniform_real_distribution<double> uv(c.min_speed, c.max_speed), uw(-c.max_yaw_rate, c.max_yaw_rate);
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    const double vc = uv(rng), wc = uw(rng);
    const double vlo = std::max(vc - c.max_accel * c.dt, c.min_speed), vhi = std::min(vc + c.max_accel * c.dt, c.max_speed);
    const double wlo = std::max(wc - c.max_yaw_accel * c.dt, -c.max_yaw_rate),
                 whi = std::min(wc + c.max_yaw_accel * c.dt, c.max_yaw_rate);
    const auto s = nav::select_velocity(nav::dynamic_window(vc, wc, c), {{ux(rng), uy(rng)}, ua(rng)},
                                        {ux(rng), uy(rng)}, arena, c);
    if (s.emergency) ++emergencies;
    const double v = s.command.v, w = s.command.omega;
    if (v < vlo || v > vhi || w < wlo || w > whi || v < c.min_speed || v > c.max_speed || std::abs(w) > c.max_yaw_rate)
      ++outside;
  }
  const int grids = 4 * 4 * 1000;
  for (int ns = 1; ns <= 4; ++ns)
    for (int nw = 1; nw <= 4; ++nw) {
      nav::DwaConfig small = c;
      small.speed_samples = ns + 1;
      small.yaw_samples = nw + 1;
      for (int k = 0; k < 1000; ++k) {
        const double vc = uv(rng), wc = uw(rng), th = ua(rng);
        const Vec2 p{ux(rng), uy(rng)}, g{ux(rng), uy(rng)};
        const auto lib = nav::select_velocity(nav::dynamic_window(vc, wc, small), {p, th}, g, arena, small);
        const auto ref = ref::dwa_oracle(vc, wc, p, th, g, arena, small);
        if (lib.emergency != !ref.any) ++mismatches;
        else if (ref.any && (lib.command.v != ref.v || lib.command.omega != ref.omega)) ++mismatches;
      }
    }
  return {outside == 0 && mismatches == 0,
          fmt("%d invocations, %d outside the window (%d emergency stops); oracle on %d small-grid cases, %d mismatches",
              n, outside, emergencies, grids, mismatches)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria, one PASS/FAIL line each"};
  std::string work_dir = "acceptance_work", config_path;
  std::vector<int> only;
  app.add_option("--work-dir", work_dir, "scratch directory for checkpoints and logs");
  app.add_option("--config", config_path, "JSON configuration for the trained-policy criteria");
  app.add_option("--only", only, "run just these criteria (1-10)")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::set<int> wanted(only.begin(), only.end());
  const auto want = [&](int k) { return wanted.empty() || wanted.count(k) > 0; };
  fs::create_directories(work_dir);

  ExperimentConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
  cfg.validate();

  static const char* names[] = {"",
                                "geometry oracle",
                                "gradient fidelity",
                                "stochastic rows",
                                "PPO reduction",
                                "reward suite",
                                "win-rate ordering",
                                "PFSM-DRL win rate",
                                "scenario jitter",
                                "determinism",
                                "DWA conformance"};
  int failed = 0;
  const auto report = [&](int k, const std::function<Verdict()>& run) {
    if (!want(k)) return;
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::cout << "[" << k << "] " << (v.pass ? "PASS" : "FAIL") << " " << names[k] << ": " << v.detail << std::endl;
  };

  report(1, geometry_oracle);
  report(2, gradient_fidelity);
  report(3, stochastic_rows);
  report(4, ppo_reduction);
  report(5, reward_suite);

  if (want(6) || want(7) || want(8)) {
    std::optional<LearnedRuns> runs;
    std::string error;
    try {
      std::cerr << "training and evaluating V3 cells in " << work_dir << "/v3\n";
      runs = run_v3_cells(cfg, work_dir + "/v3");
    } catch (const std::exception& e) {
      error = e.what();
    }
    const auto need = [&]() {
      if (!runs) throw std::runtime_error("V3 runs failed: " + error);
      return *runs;
    };
    report(6, [&] { return ordering(cfg, need()); });
    report(7, [&] { return win_target(need()); });
    report(8, [&] { return scenario_jitter(need().drl_first_checkpoint); });
  }

  report(9, [&] { return determinism(work_dir + "/determinism"); });
  report(10, dwa_conformance);

  std::cout << (failed == 0 ? "all requested criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
