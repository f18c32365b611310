#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "swarm/arena/types.hpp"
#include "swarm/nav/route.hpp"
#include "swarm/pfsm/observation.hpp"

namespace swarm::nav {

struct GoalConfig {
  double escape_radius{3.0};
  int escape_samples{16};
  double min_goal_clearance{0.3};
  // Seconds of target motion to lead when intercepting; capped by this value.
  double max_intercept_lead{1.0};
  RouteConfig route;
};

inline Vec2 clamp_into(const arena::ArenaConfig& arena, Vec2 p, double margin = 0.1) {
  p.x = std::clamp(p.x, margin, arena.width - margin);
  p.y = std::clamp(p.y, margin, arena.height - margin);
  return p;
}

// Lead the target by its velocity for the time it takes to cover the gap.
inline Vec2 intercept_point(const pfsm::EnemyContact& target,
                            double max_speed, const GoalConfig& cfg,
                            const arena::ArenaConfig& arena) {
  const double lead = std::min(target.distance / max_speed, cfg.max_intercept_lead);
  return clamp_into(arena, target.position + target.velocity * lead);
}

// Reachable sample around the agent farthest from every perceived enemy.
inline Vec2 safe_location(const pfsm::Observation& obs, const arena::ArenaConfig& arena,
                          const GoalConfig& cfg) {
  if (obs.enemies.empty()) return obs.position;
  Vec2 best = obs.position;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < cfg.escape_samples; ++k) {
    const double angle = 2.0 * M_PI * k / cfg.escape_samples;
    const Vec2 q = obs.position + from_polar(cfg.escape_radius, angle);
    if (!arena.inside_bounds(q) || arena.clearance(q) < cfg.min_goal_clearance) continue;
    double threat = std::numeric_limits<double>::infinity();
    for (const auto& e : obs.enemies) threat = std::min(threat, distance(q, e.position));
    if (threat > best_score) {
      best_score = threat;
      best = q;
    }
  }
  return best;
}

inline std::optional<Vec2> teammate_position(const pfsm::Observation& obs,
                                             std::optional<arena::AgentId> id) {
  if (id)
    for (const auto& t : obs.teammates)
      if (t.id == *id) return t.position;
  if (!obs.teammates.empty()) return obs.teammates.front().position;
  return std::nullopt;
}

// Movement target implied by the behavioral state's action bundle.
inline Vec2 goal_for_state(pfsm::StateId state, const pfsm::Observation& obs,
                           std::optional<arena::AgentId> locked_target, const Vec2& patrol_point,
                           double max_speed, const arena::ArenaConfig& arena,
                           const GoalConfig& cfg) {
  using pfsm::StateId;
  const auto find_enemy = [&](std::optional<arena::AgentId> id) -> const pfsm::EnemyContact* {
    if (id)
      for (const auto& e : obs.enemies)
        if (e.id == *id) return &e;
    return obs.enemies.empty() ? nullptr : &obs.enemies.front();
  };
  switch (state) {
    case StateId::kTrack:
      if (const auto* e = find_enemy(locked_target)) return intercept_point(*e, max_speed, cfg, arena);
      return patrol_point;
    case StateId::kEscape:
      return safe_location(obs, arena, cfg);
    case StateId::kCooperate:
      if (auto p = teammate_position(obs, std::nullopt)) return *p;
      return safe_location(obs, arena, cfg);
    case StateId::kSupport:
      if (auto p = teammate_position(obs, obs.help_caller)) return *p;
      return patrol_point;
    case StateId::kSearch:
      if (!obs.enemies.empty()) return obs.enemies.front().position;
      return patrol_point;
  }
  return patrol_point;
}

}  // namespace swarm::nav
