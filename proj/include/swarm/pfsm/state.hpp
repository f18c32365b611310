#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace swarm::pfsm {

// Behavioral states, numbered as in the published state plots: Search (1) .. Support (5).
enum class StateId : int { kSearch = 0, kTrack = 1, kEscape = 2, kCooperate = 3, kSupport = 4 };

inline constexpr std::size_t kNumStates = 5;

inline constexpr std::array<StateId, kNumStates> kAllStates = {
    StateId::kSearch, StateId::kTrack, StateId::kEscape, StateId::kCooperate, StateId::kSupport};

constexpr std::size_t index(StateId s) { return static_cast<std::size_t>(s); }

constexpr bool valid_index(int i) { return i >= 0 && i < static_cast<int>(kNumStates); }

constexpr StateId state_from_index(std::size_t i) { return kAllStates.at(i); }

constexpr std::string_view name(StateId s) {
  constexpr std::array<std::string_view, kNumStates> kNames = {"Search", "Track", "Escape",
                                                               "Cooperate", "Support"};
  return kNames[index(s)];
}

inline std::optional<StateId> parse_state(std::string_view text) {
  for (StateId s : kAllStates)
    if (name(s) == text) return s;
  return std::nullopt;
}

constexpr std::array<double, kNumStates> one_hot(StateId s) {
  std::array<double, kNumStates> v{};
  v[index(s)] = 1.0;
  return v;
}

// Actions bound to states. A state executes its whole bundle, in order, every tick it holds.
enum class Action : int {
  kSearchTheEnemy,
  kExecutePlanningPoint,
  kLockOnToTheEnemy,
  kLaunchMissiles,
  kMoveToSafeLocation,
  kSendOutHelpSignal,
  kApproachTeammates,
  kTacticalCoordination,
};

inline constexpr std::size_t kNumActions = 8;

constexpr std::string_view name(Action a) {
  constexpr std::array<std::string_view, kNumActions> kNames = {
      "Search the Enemy",     "Execute Planning Point", "Lock on to the Enemy",
      "Launch missiles",      "Move to Safe Location",  "Send out Help Signal",
      "Approach Teammates",   "Tactical Coordination"};
  return kNames[static_cast<std::size_t>(a)];
}

inline std::span<const Action> actions_for(StateId s) {
  static constexpr std::array<Action, 2> kSearch = {Action::kSearchTheEnemy,
                                                    Action::kExecutePlanningPoint};
  static constexpr std::array<Action, 2> kTrack = {Action::kLockOnToTheEnemy,
                                                   Action::kLaunchMissiles};
  static constexpr std::array<Action, 1> kEscape = {Action::kMoveToSafeLocation};
  static constexpr std::array<Action, 2> kCooperate = {Action::kSendOutHelpSignal,
                                                       Action::kApproachTeammates};
  static constexpr std::array<Action, 2> kSupport = {Action::kTacticalCoordination,
                                                     Action::kApproachTeammates};
  switch (s) {
    case StateId::kSearch: return kSearch;
    case StateId::kTrack: return kTrack;
    case StateId::kEscape: return kEscape;
    case StateId::kCooperate: return kCooperate;
    case StateId::kSupport: return kSupport;
  }
  return {};
}

}  // namespace swarm::pfsm
