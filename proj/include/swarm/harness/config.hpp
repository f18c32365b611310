#pragma once

#include <cstdint>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "swarm/arena/types.hpp"
#include "swarm/core/error.hpp"
#include "swarm/featnet/network.hpp"
#include "swarm/nav/dwa.hpp"
#include "swarm/nav/goals.hpp"
#include "swarm/pfsm/observation.hpp"
#include "swarm/pfsm/transition.hpp"
#include "swarm/ppo/config.hpp"

namespace swarm::harness {

using nlohmann::json;

enum class PolicyKind { kPfsmDrl, kPfsmRl, kFsm, kIfElse, kOracle, kIdle };

inline constexpr std::string_view name(PolicyKind k) {
  switch (k) {
    case PolicyKind::kPfsmDrl: return "PFSM-DRL";
    case PolicyKind::kPfsmRl: return "PFSM-RL";
    case PolicyKind::kFsm: return "FSM";
    case PolicyKind::kIfElse: return "IfElse";
    case PolicyKind::kOracle: return "Oracle";
    case PolicyKind::kIdle: return "Idle";
  }
  return "?";
}

inline PolicyKind parse_policy(std::string_view s) {
  for (PolicyKind k : {PolicyKind::kPfsmDrl, PolicyKind::kPfsmRl, PolicyKind::kFsm, PolicyKind::kIfElse,
                       PolicyKind::kOracle, PolicyKind::kIdle})
    if (name(k) == s) return k;
  fail(ErrorCode::kInvalidConfig, "unknown policy '" + std::string(s) + "'");
}

inline bool learned(PolicyKind k) { return k == PolicyKind::kPfsmDrl || k == PolicyKind::kPfsmRl; }

// Team spawn regions: red on the left edge, blue mirrored on the right.
struct SpawnConfig {
  double edge_margin{1.0};
  double region_width{3.0};
  double y_margin{2.0};
  double min_separation{0.8};
};

// Two reds against one blue, positions before jitter.
struct ScenarioConfig {
  std::vector<Vec2> red{{4.0, 6.5}, {4.0, 8.5}};
  std::vector<Vec2> blue{{18.0, 7.5}};
  double position_jitter{0.5};
  PolicyKind red_policy{PolicyKind::kPfsmDrl};
  PolicyKind blue_policy{PolicyKind::kFsm};
};

struct HarnessConfig {
  int team_size{3};
  PolicyKind red_policy{PolicyKind::kPfsmDrl};
  PolicyKind blue_policy{PolicyKind::kFsm};
  int eval_games{50};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<int> team_sizes{3, 5, 10};
  std::vector<PolicyKind> ablation_policies{PolicyKind::kPfsmDrl, PolicyKind::kPfsmRl, PolicyKind::kFsm,
                                            PolicyKind::kIfElse};
  int jitter_window{10};
  int deadlock_dwell{100};
  int threads{0};  // 0: hardware concurrency
  int critic_hidden{128};
  // Critic input: behavioral state and transition matrix, plus the actor's features when set.
  bool critic_features{false};
  // When positive, training ends by restoring the parameters that collected the best mean reward
  // over this many consecutive episodes.
  int keep_best_window{0};
  double waypoint_radius{1.0};
  int patrol_waypoints{6};
  int intel_ttl{100};  // ticks a team keeps chasing its last enemy sighting; 0 disables
  std::uint64_t eval_seed_offset{1000000};
  SpawnConfig spawn;
  ScenarioConfig scenario;

  void validate() const {
    require(team_size >= 1, ErrorCode::kInvalidConfig, "team size must be >= 1");
    for (int n : team_sizes) require(n >= 1, ErrorCode::kInvalidConfig, "team sizes must be >= 1");
    require(eval_games >= 0, ErrorCode::kInvalidConfig, "game count must be non-negative");
    for (std::size_t i = 0; i < seeds.size(); ++i)
      for (std::size_t j = i + 1; j < seeds.size(); ++j)
        require(seeds[i] != seeds[j], ErrorCode::kInvalidConfig, "seeds must be distinct");
    require(jitter_window >= 3 && deadlock_dwell >= 1, ErrorCode::kInvalidConfig,
            "jitter window must be >= 3 and deadlock dwell >= 1");
    require(critic_hidden >= 1 && patrol_waypoints >= 1 && waypoint_radius > 0.0 && intel_ttl >= 0,
            ErrorCode::kInvalidConfig, "harness sizes must be positive");
    require(keep_best_window >= 0, ErrorCode::kInvalidConfig, "keep_best_window must be non-negative");
    require(!scenario.red.empty() && !scenario.blue.empty(), ErrorCode::kInvalidConfig,
            "scenario needs agents on both teams");
  }
};

// Every module section in one document.
struct ExperimentConfig {
  arena::ArenaConfig arena;
  arena::SensorSpec sensors;
  arena::KinematicLimits limits;
  pfsm::PfsmSpec pfsm;
  pfsm::RuleConfig rules;
  nav::DwaConfig dwa;
  nav::GoalConfig goals;
  featnet::NetworkConfig network;
  ppo::PpoConfig ppo;
  ppo::RewardConfig reward;
  HarnessConfig harness;

  void validate() const {
    arena.validate();
    sensors.validate();
    limits.validate();
    pfsm.validate();
    dwa.validate();
    network.validate();
    ppo.validate();
    reward.validate();
    harness.validate();
    require(std::abs(dwa.dt - arena.dt) < 1e-12, ErrorCode::kInvalidConfig,
            "planner dt must equal the arena dt");
    require(dwa.max_speed <= limits.max_speed + 1e-12, ErrorCode::kInvalidConfig,
            "planner speed bound exceeds the agent speed limit");
    require(ppo.max_steps == arena.max_ticks, ErrorCode::kInvalidConfig,
            "ppo max_steps must equal the arena tick limit");
    require(network.features.max_ticks == arena.max_ticks, ErrorCode::kInvalidConfig,
            "feature time scale must match max_ticks");
  }
};

// Central obstacles with a gap at mid-height, mirrored about both axes.
inline std::vector<arena::ConvexPolygon> default_obstacles(double width = 22.0, double height = 15.0) {
  const double cx = 0.5 * width, cy = 0.5 * height;
  return {arena::ConvexPolygon::rectangle(cx - 0.6, cy - 4.5, cx + 0.6, cy - 1.5),
          arena::ConvexPolygon::rectangle(cx - 0.6, cy + 1.5, cx + 0.6, cy + 4.5)};
}

inline ExperimentConfig default_config() {
  ExperimentConfig c;
  c.arena.obstacles = default_obstacles(c.arena.width, c.arena.height);
  return c;
}

namespace detail {

template <class T>
void read(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

inline json vec2(const Vec2& v) { return json::array({v.x, v.y}); }
inline Vec2 vec2(const json& j) {
  require(j.is_array() && j.size() == 2, ErrorCode::kInvalidConfig, "points are [x, y] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json points(const std::vector<Vec2>& ps) {
  json a = json::array();
  for (const auto& p : ps) a.push_back(vec2(p));
  return a;
}
inline std::vector<Vec2> points(const json& j) {
  std::vector<Vec2> out;
  for (const auto& p : j) out.push_back(vec2(p));
  return out;
}

inline double deg(double rad) { return rad * 180.0 / M_PI; }
inline double rad(double deg) { return deg * M_PI / 180.0; }

}  // namespace detail

inline json to_json(const ExperimentConfig& c) {
  using detail::points;
  json j;
  json obstacles = json::array();
  for (const auto& o : c.arena.obstacles) obstacles.push_back(points(o.vertices()));
  j["arena"] = {{"width", c.arena.width},         {"height", c.arena.height},
                {"obstacles", obstacles},         {"dt", c.arena.dt},
                {"max_ticks", c.arena.max_ticks}, {"seed", c.arena.seed}};
  j["sensors"] = {{"perception_radius", c.sensors.perception_radius},
                  {"attack_radius", c.sensors.attack_radius},
                  {"perception_angle_deg", detail::deg(c.sensors.perception_angle)},
                  {"attack_angle_deg", detail::deg(c.sensors.attack_angle)}};
  j["limits"] = {{"max_speed", c.limits.max_speed},
                 {"max_missiles", c.limits.max_missiles},
                 {"missile_cooldown_ticks", c.limits.missile_cooldown_ticks}};
  json mask = json::array();
  for (pfsm::StateId from : pfsm::kAllStates) {
    json row = json::array();
    for (pfsm::StateId to : pfsm::kAllStates) row.push_back(c.pfsm.mask.allowed(from, to) ? 1 : 0);
    mask.push_back(row);
  }
  j["pfsm"] = {{"initial_distribution", c.pfsm.initial_distribution}, {"topology_mask", mask}};
  j["rules"] = {{"advantage_margin", c.rules.advantage_margin},
                {"pursuit_slack", c.rules.pursuit_slack},
                {"turn_rate", c.rules.turn_rate},
                {"teammate_range", c.rules.teammate_range},
                {"help_range", c.rules.help_range}};
  const auto& d = c.dwa;
  j["dwa"] = {{"max_accel", d.max_accel},         {"max_yaw_accel", d.max_yaw_accel},
              {"dt", d.dt},                       {"min_speed", d.min_speed},
              {"max_speed", d.max_speed},         {"max_yaw_rate", d.max_yaw_rate},
              {"speed_samples", d.speed_samples}, {"yaw_samples", d.yaw_samples},
              {"heading_weight", d.heading_weight}, {"clearance_weight", d.clearance_weight},
              {"speed_weight", d.speed_weight},   {"horizon", d.horizon},
              {"robot_radius", d.robot_radius},   {"clearance_cap", d.clearance_cap}};
  j["goals"] = {{"escape_radius", c.goals.escape_radius},
                {"escape_samples", c.goals.escape_samples},
                {"min_goal_clearance", c.goals.min_goal_clearance},
                {"max_intercept_lead", c.goals.max_intercept_lead},
                {"route_corner_offset", c.goals.route.corner_offset},
                {"route_clearance", c.goals.route.clearance}};
  const auto& n = c.network;
  j["network"] = {{"window", n.features.window},
                  {"max_teammates", n.features.max_teammates},
                  {"max_enemies", n.features.max_enemies},
                  {"sigma_floor", n.features.sigma_floor},
                  {"max_ticks", n.features.max_ticks},
                  {"conv_channels", n.conv_channels},
                  {"kernel", n.kernel},
                  {"pool", n.pool},
                  {"embed", n.embed},
                  {"stream_out", n.stream_out},
                  {"hidden", n.hidden},
                  {"temperature", n.temperature},
                  {"learn_temperature", n.learn_temperature},
                  {"init_seed", n.init_seed}};
  const auto& p = c.ppo;
  j["ppo"] = {{"gamma", p.gamma},
              {"gae_lambda", p.gae_lambda},
              {"clip_epsilon", p.clip_epsilon},
              {"actor_lr", p.actor_lr},
              {"critic_lr", p.critic_lr},
              {"l1_weight", p.l1_weight},
              {"frobenius_weight", p.frobenius_weight},
              {"uncertainty_scale", p.uncertainty_scale},
              {"episodes", p.episodes},
              {"max_steps", p.max_steps},
              {"epochs", p.epochs},
              {"minibatch_size", p.minibatch_size},
              {"max_grad_norm", p.max_grad_norm},
              {"normalize_advantages", p.normalize_advantages},
              {"literal_signs", p.literal_signs},
              {"optimizer", p.optimizer == ppo::OptimizerKind::kAdam ? "adam" : "sgd"}};
  json costs = json::object();
  for (std::size_t a = 0; a < pfsm::kNumActions; ++a)
    costs[std::string(pfsm::name(static_cast<pfsm::Action>(a)))] = c.reward.action_cost[a];
  const auto& r = c.reward;
  j["reward"] = {{"deadlock_weight", r.deadlock_weight}, {"jitter_weight", r.jitter_weight},
                 {"goal_reward", r.goal_reward},         {"deadlock_penalty", r.deadlock_penalty},
                 {"jitter_penalty", r.jitter_penalty},   {"jitter_window", r.jitter_window},
                 {"deadlock_threshold", r.deadlock_threshold}, {"action_cost", costs}};
  const auto& h = c.harness;
  json policies = json::array();
  for (auto k : h.ablation_policies) policies.push_back(std::string(name(k)));
  j["harness"] = {{"team_size", h.team_size},
                  {"red_policy", std::string(name(h.red_policy))},
                  {"blue_policy", std::string(name(h.blue_policy))},
                  {"eval_games", h.eval_games},
                  {"seeds", h.seeds},
                  {"team_sizes", h.team_sizes},
                  {"ablation_policies", policies},
                  {"jitter_window", h.jitter_window},
                  {"deadlock_dwell", h.deadlock_dwell},
                  {"threads", h.threads},
                  {"critic_hidden", h.critic_hidden}, {"critic_features", h.critic_features},
                  {"keep_best_window", h.keep_best_window},
                  {"waypoint_radius", h.waypoint_radius},
                  {"patrol_waypoints", h.patrol_waypoints},
                  {"intel_ttl", h.intel_ttl},
                  {"eval_seed_offset", h.eval_seed_offset},
                  {"spawn",
                   {{"edge_margin", h.spawn.edge_margin},
                    {"region_width", h.spawn.region_width},
                    {"y_margin", h.spawn.y_margin},
                    {"min_separation", h.spawn.min_separation}}},
                  {"scenario",
                   {{"red", points(h.scenario.red)},
                    {"blue", points(h.scenario.blue)},
                    {"position_jitter", h.scenario.position_jitter},
                    {"red_policy", std::string(name(h.scenario.red_policy))},
                    {"blue_policy", std::string(name(h.scenario.blue_policy))}}}};
  return j;
}

// Missing keys keep their defaults; unknown top-level sections are rejected.
inline ExperimentConfig config_from_json(const json& j) {
  using detail::read;
  ExperimentConfig c = default_config();
  static const std::vector<std::string> kSections = {"arena", "sensors", "limits", "pfsm",   "rules", "dwa",
                                                     "goals", "network", "ppo",    "reward", "harness"};
  require(j.is_object(), ErrorCode::kInvalidConfig, "config must be a JSON object");
  for (const auto& [key, _] : j.items())
    require(std::find(kSections.begin(), kSections.end(), key) != kSections.end(), ErrorCode::kInvalidConfig,
            "unknown config section '" + key + "'");
  try {
    const json e = json::object();
    const json& a = j.value("arena", e);
    read(a, "width", c.arena.width);
    read(a, "height", c.arena.height);
    read(a, "dt", c.arena.dt);
    read(a, "max_ticks", c.arena.max_ticks);
    read(a, "seed", c.arena.seed);
    if (a.contains("obstacles")) {
      c.arena.obstacles.clear();
      for (const auto& poly : a["obstacles"]) c.arena.obstacles.emplace_back(detail::points(poly));
    }
    const json& s = j.value("sensors", e);
    read(s, "perception_radius", c.sensors.perception_radius);
    read(s, "attack_radius", c.sensors.attack_radius);
    if (s.contains("perception_angle_deg")) c.sensors.perception_angle = detail::rad(s["perception_angle_deg"]);
    if (s.contains("attack_angle_deg")) c.sensors.attack_angle = detail::rad(s["attack_angle_deg"]);
    const json& l = j.value("limits", e);
    read(l, "max_speed", c.limits.max_speed);
    read(l, "max_missiles", c.limits.max_missiles);
    read(l, "missile_cooldown_ticks", c.limits.missile_cooldown_ticks);
    const json& pf = j.value("pfsm", e);
    read(pf, "initial_distribution", c.pfsm.initial_distribution);
    if (pf.contains("topology_mask")) {
      const json& m = pf["topology_mask"];
      require(m.is_array() && m.size() == 5, ErrorCode::kInvalidConfig, "topology_mask must be 5x5");
      for (std::size_t r = 0; r < 5; ++r) {
        require(m[r].is_array() && m[r].size() == 5, ErrorCode::kInvalidConfig, "topology_mask must be 5x5");
        for (std::size_t col = 0; col < 5; ++col) {
          const json& v = m[r][col];
          const bool ok = v.is_boolean() ? v.get<bool>() : v.get<int>() != 0;
          c.pfsm.mask.set(pfsm::state_from_index(r), pfsm::state_from_index(col), ok);
        }
      }
    }
    const json& ru = j.value("rules", e);
    read(ru, "advantage_margin", c.rules.advantage_margin);
    read(ru, "pursuit_slack", c.rules.pursuit_slack);
    read(ru, "turn_rate", c.rules.turn_rate);
    read(ru, "teammate_range", c.rules.teammate_range);
    read(ru, "help_range", c.rules.help_range);
    const json& d = j.value("dwa", e);
    read(d, "max_accel", c.dwa.max_accel);
    read(d, "max_yaw_accel", c.dwa.max_yaw_accel);
    read(d, "dt", c.dwa.dt);
    read(d, "min_speed", c.dwa.min_speed);
    read(d, "max_speed", c.dwa.max_speed);
    read(d, "max_yaw_rate", c.dwa.max_yaw_rate);
    read(d, "speed_samples", c.dwa.speed_samples);
    read(d, "yaw_samples", c.dwa.yaw_samples);
    read(d, "heading_weight", c.dwa.heading_weight);
    read(d, "clearance_weight", c.dwa.clearance_weight);
    read(d, "speed_weight", c.dwa.speed_weight);
    read(d, "horizon", c.dwa.horizon);
    read(d, "robot_radius", c.dwa.robot_radius);
    read(d, "clearance_cap", c.dwa.clearance_cap);
    const json& g = j.value("goals", e);
    read(g, "escape_radius", c.goals.escape_radius);
    read(g, "escape_samples", c.goals.escape_samples);
    read(g, "min_goal_clearance", c.goals.min_goal_clearance);
    read(g, "max_intercept_lead", c.goals.max_intercept_lead);
    read(g, "route_corner_offset", c.goals.route.corner_offset);
    read(g, "route_clearance", c.goals.route.clearance);
    const json& n = j.value("network", e);
    read(n, "window", c.network.features.window);
    read(n, "max_teammates", c.network.features.max_teammates);
    read(n, "max_enemies", c.network.features.max_enemies);
    read(n, "sigma_floor", c.network.features.sigma_floor);
    read(n, "max_ticks", c.network.features.max_ticks);
    read(n, "conv_channels", c.network.conv_channels);
    read(n, "kernel", c.network.kernel);
    read(n, "pool", c.network.pool);
    read(n, "embed", c.network.embed);
    read(n, "stream_out", c.network.stream_out);
    read(n, "hidden", c.network.hidden);
    read(n, "temperature", c.network.temperature);
    read(n, "learn_temperature", c.network.learn_temperature);
    read(n, "init_seed", c.network.init_seed);
    const json& p = j.value("ppo", e);
    read(p, "gamma", c.ppo.gamma);
    read(p, "gae_lambda", c.ppo.gae_lambda);
    read(p, "clip_epsilon", c.ppo.clip_epsilon);
    read(p, "actor_lr", c.ppo.actor_lr);
    read(p, "critic_lr", c.ppo.critic_lr);
    read(p, "l1_weight", c.ppo.l1_weight);
    read(p, "frobenius_weight", c.ppo.frobenius_weight);
    read(p, "uncertainty_scale", c.ppo.uncertainty_scale);
    read(p, "episodes", c.ppo.episodes);
    read(p, "max_steps", c.ppo.max_steps);
    read(p, "epochs", c.ppo.epochs);
    read(p, "minibatch_size", c.ppo.minibatch_size);
    read(p, "max_grad_norm", c.ppo.max_grad_norm);
    read(p, "normalize_advantages", c.ppo.normalize_advantages);
    read(p, "literal_signs", c.ppo.literal_signs);
    if (p.contains("optimizer")) {
      const std::string o = p["optimizer"];
      require(o == "adam" || o == "sgd", ErrorCode::kInvalidConfig, "optimizer must be adam or sgd");
      c.ppo.optimizer = o == "adam" ? ppo::OptimizerKind::kAdam : ppo::OptimizerKind::kSgd;
    }
    const json& r = j.value("reward", e);
    read(r, "deadlock_weight", c.reward.deadlock_weight);
    read(r, "jitter_weight", c.reward.jitter_weight);
    read(r, "goal_reward", c.reward.goal_reward);
    read(r, "deadlock_penalty", c.reward.deadlock_penalty);
    read(r, "jitter_penalty", c.reward.jitter_penalty);
    read(r, "jitter_window", c.reward.jitter_window);
    read(r, "deadlock_threshold", c.reward.deadlock_threshold);
    if (r.contains("action_cost")) {
      for (const auto& [k, v] : r["action_cost"].items()) {
        bool found = false;
        for (std::size_t a = 0; a < pfsm::kNumActions; ++a)
          if (pfsm::name(static_cast<pfsm::Action>(a)) == k) {
            c.reward.action_cost[a] = v.get<double>();
            found = true;
          }
        require(found, ErrorCode::kInvalidConfig, "unknown action '" + k + "' in action_cost");
      }
    }
    const json& h = j.value("harness", e);
    auto& hc = c.harness;
    read(h, "team_size", hc.team_size);
    if (h.contains("red_policy")) hc.red_policy = parse_policy(h["red_policy"].get<std::string>());
    if (h.contains("blue_policy")) hc.blue_policy = parse_policy(h["blue_policy"].get<std::string>());
    read(h, "eval_games", hc.eval_games);
    read(h, "seeds", hc.seeds);
    read(h, "team_sizes", hc.team_sizes);
    if (h.contains("ablation_policies")) {
      hc.ablation_policies.clear();
      for (const auto& k : h["ablation_policies"]) hc.ablation_policies.push_back(parse_policy(k.get<std::string>()));
    }
    read(h, "jitter_window", hc.jitter_window);
    read(h, "deadlock_dwell", hc.deadlock_dwell);
    read(h, "threads", hc.threads);
    read(h, "critic_hidden", hc.critic_hidden);
    read(h, "critic_features", hc.critic_features);
    read(h, "keep_best_window", hc.keep_best_window);
    read(h, "waypoint_radius", hc.waypoint_radius);
    read(h, "patrol_waypoints", hc.patrol_waypoints);
    read(h, "intel_ttl", hc.intel_ttl);
    read(h, "eval_seed_offset", hc.eval_seed_offset);
    if (h.contains("spawn")) {
      const json& sp = h["spawn"];
      read(sp, "edge_margin", hc.spawn.edge_margin);
      read(sp, "region_width", hc.spawn.region_width);
      read(sp, "y_margin", hc.spawn.y_margin);
      read(sp, "min_separation", hc.spawn.min_separation);
    }
    if (h.contains("scenario")) {
      const json& sc = h["scenario"];
      if (sc.contains("red")) hc.scenario.red = detail::points(sc["red"]);
      if (sc.contains("blue")) hc.scenario.blue = detail::points(sc["blue"]);
      read(sc, "position_jitter", hc.scenario.position_jitter);
      if (sc.contains("red_policy")) hc.scenario.red_policy = parse_policy(sc["red_policy"].get<std::string>());
      if (sc.contains("blue_policy")) hc.scenario.blue_policy = parse_policy(sc["blue_policy"].get<std::string>());
    }
  } catch (const json::exception& ex) {
    fail(ErrorCode::kInvalidConfig, std::string("malformed config: ") + ex.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    fail(ErrorCode::kInvalidConfig, path + ": " + ex.what());
  }
  return config_from_json(j);
}

inline void save_config(const ExperimentConfig& c, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path);
  out << to_json(c).dump(2) << '\n';
}

}  // namespace swarm::harness
