#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "swarm/arena/world.hpp"
#include "swarm/pfsm/state.hpp"

namespace swarm::pfsm {

using arena::AgentId;

// Thresholds shared by the rule-based policies and the goal-state oracle.
struct RuleConfig {
  // Seconds by which my time-to-strike must beat the opponent's to count as an advantage.
  double advantage_margin{0.0};
  // The goal oracle keeps pressing an engagement while its time-to-strike trails by at most this.
  double pursuit_slack{0.5};
  // Turn rate (rad/s) assumed when estimating how long an agent needs to face its target.
  double turn_rate{2.0};
  // A teammate this close counts as "in range" for the FSM Escape -> Cooperate rule.
  double teammate_range{2.0};
  // Radius over which a Cooperate agent's help signal is received.
  double help_range{8.0};
};

struct EnemyContact {
  AgentId id{0};
  Vec2 position;
  Vec2 velocity;
  double distance{0.0};
  double my_angle{M_PI};     // theta_ij: how well I face the enemy.
  double their_angle{M_PI};  // theta_ji: how well the enemy faces me.
  int their_missiles{0};
  bool in_sector{false};     // In my attack sector with line of sight.
  bool advantage{false};     // I can strike it no later than it can strike me.
  bool pursuit{false};       // Worth pressing: advantage within the oracle's slack.
  StateId behavior{StateId::kSearch};
};

struct TeammateContact {
  AgentId id{0};
  Vec2 position;
  Vec2 velocity;
  double distance{0.0};
  StateId behavior{StateId::kSearch};
};

// Per-agent perception snapshot taken before any agent transitions this tick.
struct Observation {
  AgentId self{0};
  arena::Team team{arena::Team::kRed};
  Vec2 position;
  Vec2 velocity;
  double heading{0.0};
  StateId current{StateId::kSearch};
  int missiles{0};
  int cooldown{0};
  std::vector<EnemyContact> enemies;  // perceived only, nearest first
  std::vector<TeammateContact> teammates;  // living teammates, nearest first
  std::optional<AgentId> help_caller;  // nearest teammate broadcasting a help signal

  bool help_signal() const { return help_caller.has_value(); }
  bool enemy_perceived() const { return !enemies.empty(); }

  bool strike_available() const {
    return std::any_of(enemies.begin(), enemies.end(),
                       [](const EnemyContact& e) { return e.in_sector && e.advantage; });
  }
  bool threatened() const {
    return std::any_of(enemies.begin(), enemies.end(),
                       [](const EnemyContact& e) { return !e.advantage; });
  }
  bool teammate_within(double range) const {
    return std::any_of(teammates.begin(), teammates.end(),
                       [&](const TeammateContact& t) { return t.distance <= range; });
  }
};

// Lower bound on the time agent i needs to bring j into its attack sector: turn the excess
// angle at the assumed turn rate, then close the excess distance at top speed.
inline double time_to_strike(double distance, double angle, const arena::SensorSpec& sensors,
                             const arena::KinematicLimits& limits, const RuleConfig& rules) {
  const double turn = std::max(0.0, angle - 0.5 * sensors.attack_angle) / rules.turn_rate;
  const double close = std::max(0.0, distance - sensors.attack_radius) / limits.max_speed;
  return turn + close;
}

// Combat advantage: I hold missiles and can attack no later than the target can attack me.
// Simultaneous launches destroy both sides, so a tie is not a disadvantage.
inline bool combat_advantage(double distance, double my_angle, double their_angle, int my_missiles,
                             int their_missiles, const arena::SensorSpec& sensors,
                             const arena::KinematicLimits& limits, const RuleConfig& rules,
                             double slack = 0.0) {
  if (my_missiles <= 0) return false;
  if (their_missiles <= 0) return true;
  const double mine = time_to_strike(distance, my_angle, sensors, limits, rules);
  const double theirs = time_to_strike(distance, their_angle, sensors, limits, rules);
  return mine + rules.advantage_margin <= theirs + slack;
}

inline Observation observe(const arena::World& world, AgentId self, const RuleConfig& rules) {
  const arena::AgentState& me = world.agent(self);
  Observation obs;
  obs.self = self;
  obs.team = me.team;
  obs.position = me.position;
  obs.velocity = me.velocity;
  obs.heading = me.heading;
  obs.current = me.behavior;
  obs.missiles = me.missiles;
  obs.cooldown = me.cooldown;
  if (!me.alive) return obs;

  double help_distance = std::numeric_limits<double>::infinity();
  for (const arena::AgentState& other : world.agents) {
    if (other.id == self || !other.alive) continue;
    if (other.team == me.team) {
      TeammateContact t;
      t.id = other.id;
      t.position = other.position;
      t.velocity = other.velocity;
      t.distance = distance(me.position, other.position);
      t.behavior = other.behavior;
      obs.teammates.push_back(t);
      if (other.behavior == StateId::kCooperate && t.distance <= rules.help_range &&
          t.distance < help_distance) {
        help_distance = t.distance;
        obs.help_caller = other.id;
      }
      continue;
    }
    if (!world.perceives(self, other.id)) continue;
    EnemyContact e;
    e.id = other.id;
    e.position = other.position;
    e.velocity = other.velocity;
    const auto mine = arena::relative_geometry(me, other);
    const auto theirs = arena::relative_geometry(other, me);
    e.distance = mine.distance;
    e.my_angle = mine.angle;
    e.their_angle = theirs.angle;
    e.their_missiles = other.missiles;
    e.behavior = other.behavior;
    e.in_sector = world.can_strike(self, other.id);
    e.advantage = combat_advantage(e.distance, e.my_angle, e.their_angle, me.missiles,
                                   other.missiles, world.sensors, world.limits, rules);
    e.pursuit = combat_advantage(e.distance, e.my_angle, e.their_angle, me.missiles, other.missiles,
                                 world.sensors, world.limits, rules, rules.pursuit_slack);
    obs.enemies.push_back(e);
  }
  const auto by_distance = [](const auto& a, const auto& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  };
  std::sort(obs.enemies.begin(), obs.enemies.end(), by_distance);
  std::sort(obs.teammates.begin(), obs.teammates.end(), by_distance);
  return obs;
}

}  // namespace swarm::pfsm
