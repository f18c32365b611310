#pragma once

#include <algorithm>
#include <cmath>

#include "swarm/arena/types.hpp"

namespace swarm::arena {

inline Vec2 clamp_speed(const Vec2& v, double max_speed) {
  const double n = v.norm();
  return n > max_speed ? v * (max_speed / n) : v;
}

// Pushes a position that ended inside an obstacle back onto its boundary and removes the
// velocity component pointing into it, so the agent slides along the edge.
inline void slide_out_of_obstacles(const ArenaConfig& arena, Vec2& p, Vec2& v) {
  for (int pass = 0; pass < 4; ++pass) {
    bool moved = false;
    for (const auto& o : arena.obstacles) {
      if (!o.contains(p)) continue;
      const Vec2 n = o.nearest_outward_normal(p);
      p = o.closest_boundary_point(p);
      const double vn = v.dot(n);
      if (vn < 0.0) v -= n * vn;
      moved = true;
    }
    if (!moved) break;
  }
}

inline void clip_to_bounds(const ArenaConfig& arena, Vec2& p, Vec2& v) {
  if (p.x < 0.0) { p.x = 0.0; v.x = std::max(v.x, 0.0); }
  if (p.x > arena.width) { p.x = arena.width; v.x = std::min(v.x, 0.0); }
  if (p.y < 0.0) { p.y = 0.0; v.y = std::max(v.y, 0.0); }
  if (p.y > arena.height) { p.y = arena.height; v.y = std::min(v.y, 0.0); }
}

// Double-integrator step, symplectic Euler: velocity first (clamped to max speed), then
// position with the new velocity, then obstacle sliding and wall clipping.
inline AgentState step_dynamics(const AgentState& state, const Vec2& u, double dt,
                                const KinematicLimits& limits, const ArenaConfig& arena) {
  require(u.finite(), ErrorCode::kInvalidControl, "control input must be finite");
  require(dt > 0.0, ErrorCode::kInvalidConfig, "dt must be positive");
  if (!state.alive) return state;
  AgentState next = state;
  next.control = u;
  Vec2 v = clamp_speed(state.velocity + u * dt, limits.max_speed);
  Vec2 p = state.position + v * dt;
  slide_out_of_obstacles(arena, p, v);
  clip_to_bounds(arena, p, v);
  next.position = p;
  next.velocity = v;
  if (v.squared_norm() > 1e-18) next.heading = std::atan2(v.y, v.x);
  return next;
}

}  // namespace swarm::arena
