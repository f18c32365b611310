#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "swarm/arena/dynamics.hpp"
#include "swarm/arena/world.hpp"
#include "swarm/featnet/features.hpp"
#include "swarm/harness/config.hpp"
#include "swarm/harness/log.hpp"
#include "swarm/harness/policies.hpp"
#include "swarm/harness/setup.hpp"
#include "swarm/nav/dwa.hpp"
#include "swarm/nav/goals.hpp"
#include "swarm/pfsm/rules.hpp"

namespace swarm::harness {

inline LogHeader make_header(const ExperimentConfig& cfg, const arena::World& w, std::uint64_t seed,
                             const Policy& red, const Policy& blue) {
  LogHeader h;
  h.seed = seed;
  for (const auto& a : w.agents) (a.team == Team::kRed ? h.red : h.blue)++;
  h.red_policy = std::string(name(red.kind()));
  h.blue_policy = std::string(name(blue.kind()));
  h.config = to_json(cfg);
  return h;
}

// perceive -> decide -> navigate -> act -> resolve -> log, until an outcome is reached.
// Module errors end the episode with a diagnostic instead of propagating.
inline EpisodeLog run_episode(const ExperimentConfig& cfg, arena::World world, Policy& red, Policy& blue,
                              LogHeader header) {
  EpisodeLog log;
  log.header = std::move(header);
  const std::size_t n = world.agents.size();
  const std::uint64_t seed = log.header.seed;
  std::vector<std::vector<Vec2>> routes;
  {
    int members[2] = {0, 0};
    for (const auto& a : world.agents) routes.push_back(patrol_route(cfg, a.team, seed, members[a.team == Team::kRed ? 0 : 1]++));
  }
  const std::vector<Vec2> route_nodes = nav::route_nodes(world.config, cfg.goals.route);
  std::vector<std::size_t> waypoint(n, 0);
  std::vector<std::optional<AgentId>> locked(n);
  // Most recent enemy sighting reported by any member of each team; Search agents without
  // contact head there while it is fresh.
  struct Sighting {
    Vec2 position;
    int tick{-1};
  };
  Sighting sighting[2];
  std::vector<featnet::Snapshot> history;
  std::vector<pfsm::Observation> obs(n);
  const auto policy_of = [&](Team t) -> Policy& { return t == Team::kRed ? red : blue; };

  red.begin_episode(world);
  blue.begin_episode(world);
  arena::Outcome outcome = arena::check_termination(world);
  try {
    while (outcome == arena::Outcome::kOngoing) {
      world.tick_cooldowns();
      std::vector<bool> acted(n);
      for (std::size_t i = 0; i < n; ++i) acted[i] = world.agents[i].alive;

      // perceive
      history.push_back(featnet::take_snapshot(world));
      if (history.size() > static_cast<std::size_t>(cfg.network.features.window)) history.erase(history.begin());
      for (std::size_t i = 0; i < n; ++i)
        obs[i] = acted[i] ? pfsm::observe(world, static_cast<AgentId>(i), cfg.rules) : pfsm::Observation{};
      const TickContext ctx{world, obs, history, cfg};
      for (std::size_t i = 0; i < n; ++i)
        if (acted[i] && !obs[i].enemies.empty())
          sighting[world.agents[i].team == Team::kRed ? 0 : 1] = {obs[i].enemies.front().position, world.tick};

      // decide on the shared snapshot, then commit
      std::vector<pfsm::StateId> next(n), goal(n);
      for (std::size_t i = 0; i < n; ++i) {
        next[i] = goal[i] = world.agents[i].behavior;
        if (!acted[i]) continue;
        goal[i] = pfsm::goal_state(obs[i]);
        next[i] = policy_of(world.agents[i].team).decide(ctx, static_cast<AgentId>(i));
      }
      for (std::size_t i = 0; i < n; ++i) world.agents[i].behavior = next[i];

      // navigate
      std::vector<Vec2> control(n);
      std::vector<double> yaw(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (!acted[i]) continue;
        arena::AgentState& a = world.agents[i];
        locked[i] = next[i] == pfsm::StateId::kTrack ? pfsm::lock_target(obs[i]) : std::nullopt;
        if (!policy_of(a.team).moves()) {
          control[i] = a.velocity * (-1.0 / world.config.dt);
          continue;
        }
        const auto& route = routes[i];
        if (distance(a.position, route[waypoint[i] % route.size()]) <= cfg.harness.waypoint_radius) ++waypoint[i];
        Vec2 patrol = route[waypoint[i] % route.size()];
        Sighting& seen = sighting[a.team == Team::kRed ? 0 : 1];
        if (policy_of(a.team).uses_sightings() && seen.tick >= 0 && world.tick - seen.tick < cfg.harness.intel_ttl) {
          if (obs[i].enemies.empty() && distance(a.position, seen.position) <= cfg.harness.waypoint_radius)
            seen.tick = -1;
          else
            patrol = seen.position;
        }
        const Vec2 target = nav::goal_for_state(next[i], obs[i], locked[i], patrol, cfg.limits.max_speed,
                                                world.config, cfg.goals);
        const Vec2 steer = nav::next_waypoint(world.config, route_nodes, a.position, target, cfg.goals.route);
        const auto window = nav::dynamic_window(a.velocity.norm(), a.yaw_rate, cfg.dwa);
        const auto sel = nav::select_velocity(window, {a.position, a.heading}, steer, world.config, cfg.dwa);
        control[i] = nav::command_to_control(a.velocity, a.heading, sel.command, world.config.dt);
        yaw[i] = sel.command.omega;
      }

      // act
      for (std::size_t i = 0; i < n; ++i) {
        if (!acted[i]) continue;
        world.agents[i] = arena::step_dynamics(world.agents[i], control[i], world.config.dt, world.limits,
                                               world.config);
        world.agents[i].yaw_rate = yaw[i];
      }

      // resolve: Track agents launch at the locked target if it is strikeable after the
      // move, otherwise at the nearest strikeable enemy.
      std::vector<arena::FireCommand> commands;
      for (std::size_t i = 0; i < n; ++i) {
        const arena::AgentState& a = world.agents[i];
        if (!acted[i] || next[i] != pfsm::StateId::kTrack || !policy_of(a.team).moves()) continue;
        if (a.missiles <= 0 || a.cooldown > 0) continue;
        std::optional<AgentId> target;
        if (locked[i] && world.can_strike(a.id, *locked[i])) {
          target = locked[i];
        } else {
          double best = std::numeric_limits<double>::infinity();
          for (const auto& e : world.agents)
            if (e.alive && e.team != a.team && world.can_strike(a.id, e.id) && distance(a.position, e.position) < best) {
              best = distance(a.position, e.position);
              target = e.id;
            }
        }
        if (target) commands.push_back({a.id, *target});
      }
      const auto res = arena::resolve_missiles(world, commands);

      // log
      TickRecord rec;
      rec.tick = world.tick;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& a = world.agents[i];
        rec.agents.push_back({a.id, a.team, a.position, a.velocity, a.behavior, goal[i], a.missiles, a.alive,
                              static_cast<bool>(acted[i])});
      }
      StepResult step;
      step.tick = world.tick;
      step.launched.assign(n, false);
      step.died.assign(n, false);
      for (const auto& c : res.launched) {
        rec.events.push_back({LogEvent::Kind::kFire, c.shooter, c.target, {}});
        step.launched[static_cast<std::size_t>(c.shooter)] = true;
      }
      for (const auto& k : res.kills) {
        rec.events.push_back({LogEvent::Kind::kKill, k.shooter, k.target, {}});
        step.died[static_cast<std::size_t>(k.target)] = true;
      }
      for (const auto& r : res.rejected)
        rec.events.push_back({LogEvent::Kind::kReject, r.command.shooter, r.command.target,
                              std::string(arena::name(r.reason))});
      log.ticks.push_back(std::move(rec));

      ++world.tick;
      outcome = arena::check_termination(world);
      step.outcome = outcome;
      step.timeout = outcome == arena::Outcome::kDraw && world.alive_count(Team::kRed) > 0 &&
                     world.alive_count(Team::kBlue) > 0;
      red.end_step(step);
      blue.end_step(step);
    }
  } catch (const Error& e) {
    log.error = Diagnostic{std::string(to_string(e.code())), e.what(), world.tick};
  }
  log.outcome = outcome;
  log.final_tick = world.tick;
  return log;
}

}  // namespace swarm::harness
