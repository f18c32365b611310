#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "swarm/arena/types.hpp"
#include "swarm/core/error.hpp"
#include "swarm/core/vec2.hpp"

namespace swarm::nav {

struct DwaConfig {
  double max_accel{0.5};       // a_v^max, m/s^2
  double max_yaw_accel{2.0};   // a_omega^max, rad/s^2
  double dt{0.1};
  double min_speed{0.0};
  double max_speed{1.5};
  double max_yaw_rate{2.0};
  int speed_samples{7};
  int yaw_samples{11};
  double heading_weight{0.5};
  double clearance_weight{0.3};
  double speed_weight{0.2};
  double horizon{1.0};
  double robot_radius{0.15};
  double clearance_cap{1.0};

  void validate() const {
    require(speed_samples >= 2 && yaw_samples >= 2, ErrorCode::kInvalidConfig,
            "DWA sample counts must be >= 2");
    require(heading_weight >= 0.0 && clearance_weight >= 0.0 && speed_weight >= 0.0,
            ErrorCode::kInvalidConfig, "DWA weights must be non-negative");
    require(heading_weight + clearance_weight + speed_weight > 0.0, ErrorCode::kInvalidConfig,
            "DWA weights must not all be zero");
    require(horizon > dt && dt > 0.0, ErrorCode::kInvalidConfig, "DWA horizon must exceed dt");
    require(max_accel > 0.0 && max_yaw_accel > 0.0, ErrorCode::kInvalidConfig,
            "DWA accelerations must be positive");
    require(min_speed >= 0.0 && max_speed > min_speed && max_yaw_rate > 0.0,
            ErrorCode::kInvalidConfig, "DWA velocity bounds are inconsistent");
    require(clearance_cap > 0.0, ErrorCode::kInvalidConfig, "clearance cap must be positive");
  }
};

struct VelocityCommand {
  double v{0.0};
  double omega{0.0};
};

struct Interval {
  double lo{0.0};
  double hi{0.0};

  bool contains(double x, double tol = 1e-12) const { return x >= lo - tol && x <= hi + tol; }
  double width() const { return hi - lo; }
};

struct DynamicWindow {
  Interval v;
  Interval omega;
};

// Velocities reachable within one step, intersected with the absolute bounds.
inline DynamicWindow dynamic_window(double v_current, double omega_current, const DwaConfig& cfg) {
  const double vc = std::clamp(v_current, cfg.min_speed, cfg.max_speed);
  const double wc = std::clamp(omega_current, -cfg.max_yaw_rate, cfg.max_yaw_rate);
  DynamicWindow w;
  w.v = {std::max(vc - cfg.max_accel * cfg.dt, cfg.min_speed),
         std::min(vc + cfg.max_accel * cfg.dt, cfg.max_speed)};
  w.omega = {std::max(wc - cfg.max_yaw_accel * cfg.dt, -cfg.max_yaw_rate),
             std::min(wc + cfg.max_yaw_accel * cfg.dt, cfg.max_yaw_rate)};
  return w;
}

// i-th of n evenly spaced samples over [lo, hi].
inline double grid_sample(const Interval& in, int i, int n) {
  if (n <= 1) return in.lo;
  if (i == n - 1) return in.hi;
  return in.lo + (in.hi - in.lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

// Pose the planner starts from.
struct Pose {
  Vec2 position;
  double heading{0.0};
};

// Signed clearance: distance to the nearest wall or obstacle, negative when inside one.
inline double signed_clearance(const arena::ArenaConfig& arena, const Vec2& p) {
  double c = std::min({p.x, arena.width - p.x, p.y, arena.height - p.y});
  for (const auto& o : arena.obstacles) {
    const double d = o.contains(p) ? -(o.closest_boundary_point(p) - p).norm() : o.distance_to(p);
    c = std::min(c, d);
  }
  return c;
}

struct CandidateScore {
  bool collides{false};
  double heading{0.0};
  double clearance{0.0};
  double speed{0.0};
  double total{0.0};
};

// Rolls a constant (v, omega) forward over the horizon and scores it.
inline CandidateScore score_candidate(const Pose& start, const Vec2& goal, double v, double omega,
                                      const arena::ArenaConfig& arena, const DwaConfig& cfg) {
  const int steps = static_cast<int>(std::ceil(cfg.horizon / cfg.dt - 1e-9));
  const double start_clearance = signed_clearance(arena, start.position);
  Vec2 p = start.position;
  double th = start.heading;
  double min_clearance = std::numeric_limits<double>::infinity();
  CandidateScore s;
  for (int k = 0; k < steps; ++k) {
    th += omega * cfg.dt;
    p += Vec2{std::cos(th), std::sin(th)} * (v * cfg.dt);
    const double c = signed_clearance(arena, p);
    min_clearance = std::min(min_clearance, c);
    if (c < cfg.robot_radius && c < start_clearance - 1e-9) s.collides = true;
  }
  const Vec2 to_goal = goal - p;
  const double miss = to_goal.squared_norm() < 1e-12
                          ? 0.0
                          : std::abs(wrap_angle(std::atan2(to_goal.y, to_goal.x) - th));
  s.heading = 1.0 - miss / M_PI;
  s.clearance = std::clamp(min_clearance, 0.0, cfg.clearance_cap) / cfg.clearance_cap;
  s.speed = v / cfg.max_speed;
  s.total = cfg.heading_weight * s.heading + cfg.clearance_weight * s.clearance +
            cfg.speed_weight * s.speed;
  return s;
}

struct Selection {
  VelocityCommand command;
  double objective{0.0};
  bool emergency{false};
};

// Grid search over the window; colliding rollouts are discarded; ties go to the smaller
// |omega|, then to the earlier sample (speed-major order).
inline Selection select_velocity(const DynamicWindow& window, const Pose& start, const Vec2& goal,
                                 const arena::ArenaConfig& arena, const DwaConfig& cfg) {
  Selection best;
  bool found = false;
  for (int i = 0; i < cfg.speed_samples; ++i) {
    const double v = grid_sample(window.v, i, cfg.speed_samples);
    for (int j = 0; j < cfg.yaw_samples; ++j) {
      const double w = grid_sample(window.omega, j, cfg.yaw_samples);
      const CandidateScore s = score_candidate(start, goal, v, w, arena, cfg);
      if (s.collides) continue;
      const bool better = !found || s.total > best.objective ||
                          (s.total == best.objective && std::abs(w) < std::abs(best.command.omega));
      if (better) {
        best = {{v, w}, s.total, false};
        found = true;
      }
    }
  }
  if (found) return best;

  // Every rollout collides: brake as hard as the window allows and turn toward the side
  // with more room.
  const Vec2 left = start.position + from_polar(1.0, start.heading + 0.5 * M_PI);
  const Vec2 right = start.position + from_polar(1.0, start.heading - 0.5 * M_PI);
  const bool turn_left = signed_clearance(arena, left) >= signed_clearance(arena, right);
  best.command = {window.v.lo, turn_left ? window.omega.hi : window.omega.lo};
  best.objective = -std::numeric_limits<double>::infinity();
  best.emergency = true;
  return best;
}

// Holonomic bridge: the acceleration that makes the double integrator reach the commanded
// speed along the commanded heading after one step.
inline Vec2 command_to_control(const Vec2& velocity, double heading, const VelocityCommand& cmd,
                               double dt) {
  const double th = heading + cmd.omega * dt;
  const Vec2 desired = from_polar(cmd.v, th);
  return (desired - velocity) / dt;
}

}  // namespace swarm::nav
