#pragma once

#include <algorithm>
#include <cmath>

#include "swarm/arena/types.hpp"

namespace swarm::arena {

// d_ij = |p_j - p_i|; theta_ij is the angle between v_i and p_j - p_i in [0, pi].
// A stationary observer (or coincident agents) faces nobody: theta_ij = pi.
inline RelativeGeometry relative_geometry(const AgentState& i, const AgentState& j) {
  const Vec2 rel = j.position - i.position;
  RelativeGeometry g;
  g.distance = rel.norm();
  const double speed = i.velocity.norm();
  if (speed <= 0.0 || g.distance <= 0.0) {
    g.angle = M_PI;
    return g;
  }
  const double c = rel.dot(i.velocity) / (g.distance * speed);
  g.angle = std::acos(std::clamp(c, -1.0, 1.0));
  return g;
}

inline bool in_perception(const AgentState& observer, const AgentState& target,
                          const SensorSpec& spec) {
  if (!observer.alive || !target.alive || observer.id == target.id) return false;
  const RelativeGeometry g = relative_geometry(observer, target);
  if (g.distance > spec.perception_radius) return false;
  if (spec.perception_angle >= 2.0 * M_PI) return true;
  return g.angle <= 0.5 * spec.perception_angle;
}

inline bool in_attack_sector(const AgentState& observer, const AgentState& target,
                             const SensorSpec& spec) {
  if (!observer.alive || !target.alive || observer.id == target.id) return false;
  if (observer.velocity.squared_norm() == 0.0) return false;
  const RelativeGeometry g = relative_geometry(observer, target);
  return g.distance <= spec.attack_radius && g.angle <= 0.5 * spec.attack_angle;
}

}  // namespace swarm::arena
