#pragma once

#include <algorithm>
#include <optional>

#include "swarm/pfsm/observation.hpp"
#include "swarm/pfsm/transition.hpp"

namespace swarm::pfsm {

// Deterministic finite state machine used by the blue team and the FSM ablation arm.
// Rules are evaluated top to bottom every tick:
//   enemy in sector with advantage           -> Track
//   already tracking, advantage still held    -> Track
//   enemy perceived without advantage:
//     escaping/cooperating, teammate in range -> Cooperate
//     otherwise                               -> Escape
//   help signal received                      -> Support
//   otherwise                                 -> Search
inline StateId fsm_baseline_policy(const Observation& obs, const RuleConfig& rules,
                                   const TopologyMask& mask = {}) {
  const bool holding = obs.current == StateId::kTrack &&
                       std::any_of(obs.enemies.begin(), obs.enemies.end(),
                                   [](const EnemyContact& e) { return e.advantage; });
  StateId desired = StateId::kSearch;
  if (obs.strike_available() || holding) {
    desired = StateId::kTrack;
  } else if (obs.threatened()) {
    const bool fleeing = obs.current == StateId::kEscape || obs.current == StateId::kCooperate;
    desired = fleeing && obs.teammate_within(rules.teammate_range) ? StateId::kCooperate
                                                                    : StateId::kEscape;
  } else if (obs.help_signal()) {
    desired = StateId::kSupport;
  }
  return constrain_to_mask(obs.current, desired, mask);
}

// Goal state s_g used by the task reward and the deadlock counter. Compared with the FSM it
// arms early: any strikeable enemy, or any enemy within the pursuit slack, means Track. An
// agent that has to flee escalates to Cooperate and calls for help.
inline StateId goal_state(const Observation& obs) {
  if (obs.missiles > 0 &&
      std::any_of(obs.enemies.begin(), obs.enemies.end(),
                  [](const EnemyContact& e) { return e.in_sector || e.pursuit; }))
    return StateId::kTrack;
  if (obs.enemy_perceived()) {
    const bool fleeing = obs.current == StateId::kEscape || obs.current == StateId::kCooperate;
    return fleeing ? StateId::kCooperate : StateId::kEscape;
  }
  if (obs.help_signal()) return StateId::kSupport;
  return StateId::kSearch;
}

struct IfElseDecision {
  enum class Kind { kFire, kApproach, kPatrol };
  Kind kind{Kind::kPatrol};
  std::optional<AgentId> target;

  bool operator==(const IfElseDecision&) const = default;
};

// Flat condition -> action rules with no memory.
inline IfElseDecision if_else_baseline_policy(const Observation& obs) {
  for (const EnemyContact& e : obs.enemies)
    if (e.in_sector) return {IfElseDecision::Kind::kFire, e.id};
  if (!obs.enemies.empty()) return {IfElseDecision::Kind::kApproach, obs.enemies.front().id};
  return {IfElseDecision::Kind::kPatrol, std::nullopt};
}

// Enemy a Track-state agent locks on to: nearest strikeable target with advantage, else the
// nearest enemy it has an advantage over, else the nearest perceived enemy.
inline std::optional<AgentId> lock_target(const Observation& obs) {
  for (const EnemyContact& e : obs.enemies)
    if (e.in_sector && e.advantage) return e.id;
  for (const EnemyContact& e : obs.enemies)
    if (e.advantage) return e.id;
  if (!obs.enemies.empty()) return obs.enemies.front().id;
  return std::nullopt;
}

}  // namespace swarm::pfsm
