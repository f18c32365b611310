#pragma once

#include <algorithm>
#include <span>
#include <string_view>
#include <vector>

#include "swarm/arena/dynamics.hpp"
#include "swarm/arena/geometry.hpp"
#include "swarm/arena/types.hpp"

namespace swarm::arena {

enum class Outcome { kOngoing, kRedWin, kBlueWin, kDraw };

constexpr std::string_view name(Outcome o) {
  switch (o) {
    case Outcome::kOngoing: return "ongoing";
    case Outcome::kRedWin: return "red_win";
    case Outcome::kBlueWin: return "blue_win";
    case Outcome::kDraw: return "draw";
  }
  return "unknown";
}

struct FireCommand {
  AgentId shooter{0};
  AgentId target{0};
};

enum class RejectReason { kShooterDead, kNoMissiles, kCoolingDown, kInvalidTarget, kOutOfSector,
                          kBlocked, kDuplicate };

constexpr std::string_view name(RejectReason r) {
  switch (r) {
    case RejectReason::kShooterDead: return "shooter_dead";
    case RejectReason::kNoMissiles: return "no_missiles";
    case RejectReason::kCoolingDown: return "cooling_down";
    case RejectReason::kInvalidTarget: return "invalid_target";
    case RejectReason::kOutOfSector: return "out_of_sector";
    case RejectReason::kBlocked: return "blocked";
    case RejectReason::kDuplicate: return "duplicate";
  }
  return "unknown";
}

struct DestructionEvent {
  AgentId shooter{0};
  AgentId target{0};
  int tick{0};
};

struct FireRejection {
  FireCommand command;
  RejectReason reason{RejectReason::kInvalidTarget};
};

struct MissileResolution {
  std::vector<FireCommand> launched;
  std::vector<DestructionEvent> kills;
  std::vector<FireRejection> rejected;
};

// The confrontation world. Agent ids equal their index in `agents`.
struct World {
  ArenaConfig config;
  SensorSpec sensors;
  KinematicLimits limits;
  std::vector<AgentState> agents;
  int tick{0};

  AgentState& agent(AgentId id) { return agents.at(static_cast<std::size_t>(id)); }
  const AgentState& agent(AgentId id) const { return agents.at(static_cast<std::size_t>(id)); }

  int alive_count(Team team) const {
    return static_cast<int>(std::count_if(agents.begin(), agents.end(), [&](const AgentState& a) {
      return a.alive && a.team == team;
    }));
  }

  bool perceives(AgentId observer, AgentId target) const {
    return in_perception(agent(observer), agent(target), sensors);
  }

  // Attack-sector test plus line of sight through the obstacle field.
  bool can_strike(AgentId shooter, AgentId target) const {
    const AgentState& s = agent(shooter);
    const AgentState& t = agent(target);
    return s.team != t.team && in_perception(s, t, sensors) && in_attack_sector(s, t, sensors) &&
           config.line_of_sight(s.position, t.position);
  }

  void tick_cooldowns() {
    for (auto& a : agents)
      if (a.cooldown > 0) --a.cooldown;
  }
};

// All commands are validated against the same pre-resolution snapshot, so mutual in-sector
// fire on one tick destroys both agents.
inline MissileResolution resolve_missiles(World& world, std::span<const FireCommand> commands) {
  MissileResolution out;
  const std::vector<AgentState> snapshot = world.agents;
  std::vector<bool> fired(snapshot.size(), false);
  std::vector<bool> destroyed(snapshot.size(), false);
  const auto valid_id = [&](AgentId id) {
    return id >= 0 && static_cast<std::size_t>(id) < snapshot.size();
  };

  for (const FireCommand& cmd : commands) {
    if (!valid_id(cmd.shooter) || !valid_id(cmd.target)) {
      out.rejected.push_back({cmd, RejectReason::kInvalidTarget});
      continue;
    }
    const AgentState& s = snapshot[static_cast<std::size_t>(cmd.shooter)];
    const AgentState& t = snapshot[static_cast<std::size_t>(cmd.target)];
    RejectReason reason{};
    bool ok = true;
    if (!s.alive) { ok = false; reason = RejectReason::kShooterDead; }
    else if (fired[static_cast<std::size_t>(cmd.shooter)]) { ok = false; reason = RejectReason::kDuplicate; }
    else if (s.missiles <= 0) { ok = false; reason = RejectReason::kNoMissiles; }
    else if (s.cooldown > 0) { ok = false; reason = RejectReason::kCoolingDown; }
    else if (!t.alive || t.team == s.team) { ok = false; reason = RejectReason::kInvalidTarget; }
    else if (!in_perception(s, t, world.sensors) || !in_attack_sector(s, t, world.sensors)) {
      ok = false;
      reason = RejectReason::kOutOfSector;
    } else if (!world.config.line_of_sight(s.position, t.position)) {
      ok = false;
      reason = RejectReason::kBlocked;
    }
    if (!ok) {
      out.rejected.push_back({cmd, reason});
      continue;
    }
    fired[static_cast<std::size_t>(cmd.shooter)] = true;
    out.launched.push_back(cmd);
    AgentState& live_shooter = world.agent(cmd.shooter);
    --live_shooter.missiles;
    live_shooter.cooldown = world.limits.missile_cooldown_ticks;
    if (!destroyed[static_cast<std::size_t>(cmd.target)]) {
      destroyed[static_cast<std::size_t>(cmd.target)] = true;
      out.kills.push_back({cmd.shooter, cmd.target, world.tick});
    }
  }
  for (const auto& k : out.kills) {
    AgentState& t = world.agent(k.target);
    t.alive = false;
    t.velocity = {};
    t.control = {};
  }
  return out;
}

inline Outcome check_termination(const World& world) {
  const int red = world.alive_count(Team::kRed);
  const int blue = world.alive_count(Team::kBlue);
  if (red == 0 && blue == 0) return Outcome::kDraw;
  if (blue == 0) return Outcome::kRedWin;
  if (red == 0) return Outcome::kBlueWin;
  if (world.tick >= world.config.max_ticks) return Outcome::kDraw;
  return Outcome::kOngoing;
}

}  // namespace swarm::arena
