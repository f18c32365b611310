#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "swarm/arena/world.hpp"
#include "swarm/harness/config.hpp"
#include "swarm/pfsm/transition.hpp"

namespace swarm::harness {


using arena::World;

// Independent streams derived from one episode seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline arena::AgentState make_agent(int id, Team team, Vec2 p, const ExperimentConfig& cfg, pfsm::StateId s) {
  arena::AgentState a;
  a.id = id;
  a.team = team;
  a.position = p;
  a.missiles = cfg.limits.max_missiles;
  a.behavior = s;
  a.heading = team == Team::kRed ? 0.0 : M_PI;
  return a;
}

// Agents at fixed positions (red first, then blue).
inline World make_world_at(const ExperimentConfig& cfg, const std::vector<Vec2>& red,
                           const std::vector<Vec2>& blue, std::uint64_t seed) {
  World w;
  w.config = cfg.arena;
  w.config.seed = seed;
  w.sensors = cfg.sensors;
  w.limits = cfg.limits;
  std::mt19937_64 rng(mix_seed(seed, 1));
  int id = 0;
  for (const Vec2& p : red) w.agents.push_back(make_agent(id++, Team::kRed, p, cfg, pfsm::initial_state(cfg.pfsm, rng)));
  for (const Vec2& p : blue) w.agents.push_back(make_agent(id++, Team::kBlue, p, cfg, pfsm::initial_state(cfg.pfsm, rng)));
  for (const auto& a : w.agents)
    require(w.config.inside_bounds(a.position) && !w.config.in_obstacle(a.position), ErrorCode::kInvalidConfig,
            "spawn position outside the free space");
  return w;
}

// Rejection-samples `n` points in a team's spawn strip. Red uses the left strip, blue the
// mirrored right strip; the two teams draw independently.
inline std::vector<Vec2> spawn_positions(const ExperimentConfig& cfg, Team team, int n, std::mt19937_64& rng) {
  const auto& s = cfg.harness.spawn;
  const auto& a = cfg.arena;
  const double x0 = team == Team::kRed ? s.edge_margin : a.width - s.edge_margin - s.region_width;
  std::uniform_real_distribution<double> ux(x0, x0 + s.region_width);
  std::uniform_real_distribution<double> uy(s.y_margin, a.height - s.y_margin);
  std::vector<Vec2> out;
  double sep = s.min_separation;
  int attempts = 0;
  while (static_cast<int>(out.size()) < n) {
    const Vec2 p{ux(rng), uy(rng)};
    bool ok = a.clearance(p) >= 0.3;
    for (const Vec2& q : out) ok = ok && distance(p, q) >= sep;
    if (ok) out.push_back(p);
    if (++attempts % 2000 == 0) sep *= 0.8;  // crowded strip: relax the spacing
  }
  return out;
}

inline World make_world(const ExperimentConfig& cfg, int red, int blue, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 0));
  const auto r = spawn_positions(cfg, Team::kRed, red, rng);
  const auto b = spawn_positions(cfg, Team::kBlue, blue, rng);
  return make_world_at(cfg, r, b, seed);
}

// Patrol route of one team member: first waypoint in the opponent half, then anywhere.
inline std::vector<Vec2> patrol_route(const ExperimentConfig& cfg, Team team, std::uint64_t seed, int member) {
  std::mt19937_64 rng(mix_seed(mix_seed(seed, team == Team::kRed ? 11 : 12), static_cast<std::uint64_t>(member)));
  const auto& a = cfg.arena;
  std::uniform_real_distribution<double> uy(1.0, a.height - 1.0);
  std::vector<Vec2> route;
  while (static_cast<int>(route.size()) < cfg.harness.patrol_waypoints) {
    double lo = 1.0, hi = a.width - 1.0;
    if (route.empty()) {
      if (team == Team::kRed) lo = 0.5 * a.width;
      else hi = 0.5 * a.width;
    }
    const Vec2 p{std::uniform_real_distribution<double>(lo, hi)(rng), uy(rng)};
    if (a.clearance(p) >= 0.5) route.push_back(p);
  }
  return route;
}

}  // namespace swarm::harness
