#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "swarm/harness/log.hpp"

namespace swarm::harness {

using pfsm::StateId;

// Behavior sequence of one agent over the ticks it was alive to act.
inline std::vector<StateId> behavior_sequence(const EpisodeLog& log, arena::AgentId id) {
  std::vector<StateId> out;
  for (const auto& t : log.ticks)
    for (const auto& a : t.agents)
      if (a.id == id && a.acted) out.push_back(a.behavior);
  return out;
}

inline std::vector<StateId> goal_sequence(const EpisodeLog& log, arena::AgentId id) {
  std::vector<StateId> out;
  for (const auto& t : log.ticks)
    for (const auto& a : t.agents)
      if (a.id == id && a.acted) out.push_back(a.goal);
  return out;
}

// A -> B -> A patterns: every maximal run of B squeezed between two runs of the same A counts
// once when the last A tick, the B run and the first returning A tick fit in W ticks.
// Overlapping patterns each count.
inline int jitter_count(std::span<const StateId> seq, int window) {
  std::vector<std::pair<StateId, int>> runs;
  for (StateId s : seq) {
    if (runs.empty() || runs.back().first != s) runs.push_back({s, 0});
    ++runs.back().second;
  }
  int n = 0;
  for (std::size_t k = 1; k + 1 < runs.size(); ++k)
    if (runs[k - 1].first == runs[k + 1].first && runs[k].second + 2 <= window) ++n;
  return n;
}

// Maximal intervals of at least T ticks in which the behavior stays fixed while the goal
// oracle asks for a different state.
inline int deadlock_count(std::span<const StateId> behavior, std::span<const StateId> goal, int dwell) {
  require(behavior.size() == goal.size(), ErrorCode::kInvalidConfig, "behavior and goal sequences differ in length");
  int n = 0, run = 0;
  for (std::size_t t = 0; t < behavior.size(); ++t) {
    const bool stuck = behavior[t] != goal[t] && (run == 0 || behavior[t] == behavior[t - 1]);
    if (stuck) {
      ++run;
    } else {
      if (run >= dwell) ++n;
      run = behavior[t] != goal[t] ? 1 : 0;
    }
  }
  if (run >= dwell) ++n;
  return n;
}

struct Dwell {
  std::array<double, pfsm::kNumStates> fraction{};
  int ticks{0};
  bool empty() const { return ticks == 0; }  // never acted, e.g. dead at spawn
};

inline Dwell state_distribution(std::span<const StateId> seq) {
  Dwell d;
  d.ticks = static_cast<int>(seq.size());
  if (seq.empty()) return d;
  for (StateId s : seq) d.fraction[pfsm::index(s)] += 1.0;
  for (double& f : d.fraction) f /= static_cast<double>(seq.size());
  return d;
}

struct AgentMetrics {
  arena::AgentId id{0};
  Team team{Team::kRed};
  int jitter{0};
  int deadlock{0};
  Dwell dwell;
  bool survived{false};
};

struct EpisodeMetrics {
  arena::Outcome outcome{arena::Outcome::kOngoing};
  int ticks{0};
  std::vector<AgentMetrics> agents;

  double team_mean(Team t, int AgentMetrics::*field) const {
    double s = 0.0;
    int n = 0;
    for (const auto& a : agents)
      if (a.team == t) {
        s += a.*field;
        ++n;
      }
    return n ? s / n : 0.0;
  }
  int team_total(Team t, int AgentMetrics::*field) const {
    int s = 0;
    for (const auto& a : agents)
      if (a.team == t) s += a.*field;
    return s;
  }
  // Tick-weighted dwell fractions of a whole team.
  std::array<double, pfsm::kNumStates> team_dwell(Team t) const {
    std::array<double, pfsm::kNumStates> f{};
    double total = 0.0;
    for (const auto& a : agents)
      if (a.team == t) {
        for (std::size_t s = 0; s < f.size(); ++s) f[s] += a.dwell.fraction[s] * a.dwell.ticks;
        total += a.dwell.ticks;
      }
    if (total > 0)
      for (double& x : f) x /= total;
    return f;
  }
};

inline EpisodeMetrics episode_metrics(const EpisodeLog& log, int jitter_window, int deadlock_dwell) {
  EpisodeMetrics m;
  m.outcome = log.outcome;
  m.ticks = log.final_tick;
  const int n = log.agent_count();
  for (int id = 0; id < n; ++id) {
    AgentMetrics a;
    a.id = id;
    a.team = id < log.header.red ? Team::kRed : Team::kBlue;
    const auto b = behavior_sequence(log, id);
    const auto g = goal_sequence(log, id);
    a.jitter = jitter_count(b, jitter_window);
    a.deadlock = deadlock_count(b, g, deadlock_dwell);
    a.dwell = state_distribution(b);
    a.survived = log.ticks.empty() ? true : log.ticks.back().agents[static_cast<std::size_t>(id)].alive;
    m.agents.push_back(a);
  }
  return m;
}

// Win/loss/draw tally from red's point of view.
struct Tally {
  int wins{0};
  int losses{0};
  int draws{0};

  void add(arena::Outcome o) {
    if (o == arena::Outcome::kRedWin) ++wins;
    else if (o == arena::Outcome::kBlueWin) ++losses;
    else ++draws;
  }
  int games() const { return wins + losses + draws; }
  double win_rate() const { return games() ? static_cast<double>(wins) / games() : 0.0; }
};

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Sample standard deviation; zero for fewer than two values.
inline double stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace swarm::harness
