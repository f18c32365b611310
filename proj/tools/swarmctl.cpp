#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "swarm/harness/checkpoint_io.hpp"
#include "swarm/harness/experiments.hpp"

namespace fs = std::filesystem;
using namespace swarm;
using namespace swarm::harness;

namespace {

ExperimentConfig config_or_default(const std::string& path) {
  ExperimentConfig c = path.empty() ? default_config() : load_config(path);
  c.validate();
  return c;
}

Models models_from(const LoadedModel& m, const std::string& path) {
  Models out;
  out.drl = m.drl;
  out.rl = m.rl;
  out.checkpoint = path;
  out.digest = m.digest;
  return out;
}

void write_game_log(const std::string& dir, const std::string& stem, const EpisodeLog& log) {
  fs::create_directories(dir);
  write_text(dir + "/" + stem + ".jsonl", log_text(log));
}

int cmd_train(const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg = config_or_default(config_path);
  const PolicyKind kind = cfg.harness.red_policy;
  require(learned(kind), ErrorCode::kInvalidConfig, "train needs a learned red policy (PFSM-DRL or PFSM-RL)");
  const std::uint64_t run_seed = seed.value_or(cfg.harness.seeds.empty() ? 1 : cfg.harness.seeds.front());
  cfg = seeded_config(cfg, run_seed);
  fs::create_directories(out_dir);
  const auto start = std::chrono::steady_clock::now();
  const auto progress = [&](const EpisodeStats& s) {
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << "episode " << s.episode << " reward " << s.mean_reward << " outcome " << arena::name(s.outcome)
              << " ticks " << s.ticks << " (" << sec << " s)\n";
  };
  featnet::Checkpoint ckpt;
  std::vector<EpisodeStats> curve;
  if (kind == PolicyKind::kPfsmDrl) {
    DrlModel model(cfg);
    curve = train(model, cfg, cfg.harness.team_size, run_seed, progress);
    ckpt = make_checkpoint(cfg, model);
  } else {
    RlModel model(cfg);
    curve = train(model, cfg, cfg.harness.team_size, run_seed, progress);
    ckpt = make_checkpoint(cfg, model);
  }
  write_text(out_dir + "/training.csv", training_csv(curve));
  featnet::write_checkpoint_file(ckpt, out_dir + "/model.ckpt");
  save_config(cfg, out_dir + "/config.json");
  std::cout << "wrote " << out_dir << "/model.ckpt and " << out_dir << "/training.csv\n";
  return 0;
}

int cmd_evaluate(const std::string& checkpoint, const std::string& policy, const std::string& config_path, int games,
                 std::optional<std::uint64_t> seed, std::optional<int> team_size, const std::string& log_dir) {
  ExperimentConfig cfg;
  Models models;
  PolicyKind kind;
  if (!checkpoint.empty()) {
    const LoadedModel m = load_model(checkpoint);
    cfg = m.config;
    kind = m.kind;
    models = models_from(m, checkpoint);
  } else {
    cfg = config_or_default(config_path);
    kind = policy.empty() ? cfg.harness.red_policy : parse_policy(policy);
    require(!learned(kind), ErrorCode::kMissingCheckpoint, "a learned policy needs --checkpoint");
  }
  if (!config_path.empty() && !checkpoint.empty()) {
    // Evaluation settings may be overridden; the network shape stays the checkpoint's.
    const ExperimentConfig o = config_or_default(config_path);
    cfg.harness.blue_policy = o.harness.blue_policy;
    cfg.harness.threads = o.harness.threads;
  }
  const int n = team_size.value_or(cfg.harness.team_size);
  const std::uint64_t s = seed.value_or(cfg.harness.seeds.empty() ? 1 : cfg.harness.seeds.front());
  const auto results = evaluate(cfg, kind, n, s, games, models);
  std::cout << games_csv_header() << '\n';
  for (std::size_t g = 0; g < results.size(); ++g) {
    const auto& m = results[g].metrics;
    std::cout << name(kind) << ',' << n << ',' << s << ',' << g << ',' << results[g].seed << ','
              << arena::name(m.outcome) << ',' << m.ticks << ',' << m.team_total(Team::kRed, &AgentMetrics::jitter)
              << ',' << m.team_total(Team::kRed, &AgentMetrics::deadlock) << ','
              << m.team_total(Team::kBlue, &AgentMetrics::jitter) << ','
              << m.team_total(Team::kBlue, &AgentMetrics::deadlock) << '\n';
    if (results[g].error) std::cerr << "game " << g << " aborted: " << results[g].error->message << '\n';
  }
  if (!log_dir.empty())
    for (int g = 0; g < games; ++g) {
      GameSpec spec{eval_game_seed(cfg, s, g), n, n, kind, cfg.harness.blue_policy, false};
      write_game_log(log_dir, "game_" + std::to_string(g), play_game(cfg, spec, models));
    }
  const Tally t = tally(results);
  std::cerr << name(kind) << " vs " << name(cfg.harness.blue_policy) << " V" << n << ": " << t.wins << " wins, "
            << t.losses << " losses, " << t.draws << " draws, win rate " << t.win_rate() << '\n';
  return 0;
}

int cmd_ablation(const std::string& config_path, const std::string& out_dir) {
  const ExperimentConfig cfg = config_or_default(config_path);
  run_ablation(cfg, out_dir, [](const std::string& row) { std::cerr << row << '\n'; });
  std::cout << "wrote " << out_dir << "/{summary,training,games,dwell}.csv\n";
  return 0;
}

int cmd_replay(const std::string& log_path, const std::string& checkpoint) {
  const std::string text = featnet::read_file_bytes(log_path, ErrorCode::kIo);
  std::istringstream in(text);
  const EpisodeLog log = read_log(in);
  Models models;
  const std::string ck = checkpoint.empty() ? log.header.checkpoint : checkpoint;
  if (!ck.empty()) {
    const LoadedModel m = load_model(ck);
    require(log.header.checkpoint_digest.empty() || m.digest == log.header.checkpoint_digest,
            ErrorCode::kMissingCheckpoint, "checkpoint " + ck + " does not match the digest recorded in the log");
    models = models_from(m, ck);
  }
  const ReplayResult r = replay(text, models);
  if (r.identical) {
    std::cout << "replay identical: " << log.ticks.size() << " ticks, outcome " << arena::name(log.outcome) << '\n';
    return 0;
  }
  std::cout << "replay diverged at line " << r.first_difference << "\n  logged:   " << r.expected
            << "\n  replayed: " << r.actual << '\n';
  return 1;
}

int cmd_scenario(std::uint64_t seed, const std::string& checkpoint, const std::string& config_path,
                 const std::string& log_path) {
  ExperimentConfig cfg = config_or_default(config_path);
  Models models;
  if (!checkpoint.empty()) {
    const LoadedModel m = load_model(checkpoint);
    const auto scenario = cfg.harness.scenario;
    if (config_path.empty()) cfg = m.config;
    cfg.harness.scenario = config_path.empty() ? m.config.harness.scenario : scenario;
    models = models_from(m, checkpoint);
  }
  const ScenarioReport r = scenario_iv_d(cfg, seed, models);
  if (!log_path.empty()) write_text(log_path, log_text(r.log));
  json j{{"seed", seed},
         {"outcome", std::string(arena::name(r.log.outcome))},
         {"ticks", r.metrics.ticks},
         {"blue_track_escape_jitter", r.blue_track_escape_jitter},
         {"red_jitter_mean", r.red_jitter_mean},
         {"blue_jitter_mean", r.blue_jitter_mean},
         {"red_deadlock", r.red_deadlock},
         {"reds_cooperated", r.reds_cooperated},
         {"red_cooperate_support_dwell", r.red_coop_support_dwell},
         {"blue_cooperate_support_dwell", r.blue_coop_support_dwell},
         {"reproducing", r.reproducing}};
  if (r.log.error) j["error"] = r.log.error->message;
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swarm combat simulator: training, evaluation and replay"};
  app.require_subcommand(1);

  std::string config, out = "out", checkpoint, policy, log, log_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> team;
  int games = 50;
  std::uint64_t scenario_seed = 1;

  auto* train_cmd = app.add_subcommand("train", "train the configured red policy against the blue team");
  train_cmd->add_option("--config", config, "JSON configuration")->required();
  train_cmd->add_option("--out", out, "output directory")->required();
  train_cmd->add_option("--seed", seed, "run seed (default: first configured seed)");

  auto* eval_cmd = app.add_subcommand("evaluate", "play evaluation games and print per-game CSV");
  eval_cmd->add_option("--checkpoint", checkpoint, "trained model");
  eval_cmd->add_option("--policy", policy, "scripted red policy when no checkpoint is given");
  eval_cmd->add_option("--config", config, "JSON configuration");
  eval_cmd->add_option("--games", games, "number of games")->check(CLI::NonNegativeNumber);
  eval_cmd->add_option("--seed", seed, "run seed");
  eval_cmd->add_option("--team-size", team, "agents per team")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--log-dir", log_dir, "write each game's EpisodeLog here");

  auto* abl_cmd = app.add_subcommand("ablation", "train and evaluate every policy, team size and seed");
  abl_cmd->add_option("--config", config, "JSON configuration")->required();
  abl_cmd->add_option("--out", out, "output directory");

  auto* replay_cmd = app.add_subcommand("replay", "re-simulate an EpisodeLog and compare");
  replay_cmd->add_option("--log", log, "EpisodeLog file")->required();
  replay_cmd->add_option("--checkpoint", checkpoint, "model file (default: the one named in the log)");

  auto* sc_cmd = app.add_subcommand("scenario-ivd", "two reds against one blue, scripted layout");
  sc_cmd->add_option("--seed", scenario_seed, "scenario seed")->required();
  sc_cmd->add_option("--checkpoint", checkpoint, "PFSM-DRL model for the reds");
  sc_cmd->add_option("--config", config, "JSON configuration");
  sc_cmd->add_option("--log", log, "write the EpisodeLog here");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train_cmd) return cmd_train(config, out, seed);
    if (*eval_cmd) return cmd_evaluate(checkpoint, policy, config, games, seed, team, log_dir);
    if (*abl_cmd) return cmd_ablation(config, out);
    if (*replay_cmd) return cmd_replay(log, checkpoint);
    if (*sc_cmd) return cmd_scenario(scenario_seed, checkpoint, config, log);
  } catch (const swarm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
