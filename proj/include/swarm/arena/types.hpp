#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "swarm/arena/polygon.hpp"
#include "swarm/core/error.hpp"
#include "swarm/core/vec2.hpp"
#include "swarm/pfsm/state.hpp"

namespace swarm::arena {

enum class Team : std::uint8_t { kRed, kBlue };

constexpr std::string_view name(Team t) { return t == Team::kRed ? "red" : "blue"; }
constexpr Team opponent(Team t) { return t == Team::kRed ? Team::kBlue : Team::kRed; }

using AgentId = int;

// Kinematic and combat status of one agent.
struct AgentState {
  AgentId id{0};
  Team team{Team::kRed};
  Vec2 position;
  Vec2 velocity;
  Vec2 control;
  int missiles{0};
  bool alive{true};
  pfsm::StateId behavior{pfsm::StateId::kSearch};
  // Facing direction in radians; follows the velocity whenever the agent moves.
  double heading{0.0};
  double yaw_rate{0.0};
  int cooldown{0};
};

struct SensorSpec {
  double perception_radius{2.0};
  double attack_radius{1.5};
  double perception_angle{2.0 * M_PI};
  double attack_angle{80.0 * M_PI / 180.0};

  void validate() const {
    require(perception_radius > attack_radius && attack_radius > 0.0, ErrorCode::kInvalidConfig,
            "sensor radii must satisfy r_d > r_s > 0");
    require(attack_angle > 0.0 && attack_angle <= perception_angle &&
                perception_angle <= 2.0 * M_PI + 1e-12,
            ErrorCode::kInvalidConfig, "sensor angles must satisfy 0 < theta_s <= theta_d <= 2pi");
  }
};

struct KinematicLimits {
  double max_speed{1.5};
  int max_missiles{2};
  int missile_cooldown_ticks{10};

  void validate() const {
    require(max_speed > 0.0, ErrorCode::kInvalidConfig, "max_speed must be positive");
    require(max_missiles >= 0, ErrorCode::kInvalidConfig, "max_missiles must be >= 0");
    require(missile_cooldown_ticks >= 0, ErrorCode::kInvalidConfig, "cooldown must be >= 0");
  }
};

struct ArenaConfig {
  double width{22.0};
  double height{15.0};
  std::vector<ConvexPolygon> obstacles;
  double dt{0.1};
  int max_ticks{512};
  std::uint64_t seed{0};

  bool inside_bounds(const Vec2& p) const {
    return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
  }

  bool in_obstacle(const Vec2& p) const {
    for (const auto& o : obstacles)
      if (o.contains(p)) return true;
    return false;
  }

  bool line_of_sight(const Vec2& a, const Vec2& b) const {
    for (const auto& o : obstacles)
      if (o.blocks_segment(a, b)) return false;
    return true;
  }

  // Distance to the nearest obstacle or arena wall.
  double clearance(const Vec2& p) const {
    double c = std::min({p.x, width - p.x, p.y, height - p.y});
    for (const auto& o : obstacles) c = std::min(c, o.distance_to(p));
    return c;
  }

  void validate() const {
    require(width > 0.0 && height > 0.0, ErrorCode::kInvalidConfig, "arena size must be positive");
    require(dt > 0.0, ErrorCode::kInvalidConfig, "dt must be positive");
    require(max_ticks > 0, ErrorCode::kInvalidConfig, "max_ticks must be positive");
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
      for (const Vec2& v : obstacles[i].vertices())
        require(inside_bounds(v), ErrorCode::kInvalidConfig, "obstacle outside arena bounds");
      for (std::size_t j = i + 1; j < obstacles.size(); ++j)
        require(!obstacles[i].overlaps(obstacles[j]), ErrorCode::kInvalidConfig,
                "obstacles overlap");
    }
  }
};

// Distance and facing alignment of one agent relative to another.
struct RelativeGeometry {
  double distance{0.0};
  double angle{M_PI};
};

}  // namespace swarm::arena
