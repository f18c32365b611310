#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "swarm/arena/world.hpp"
#include "swarm/core/error.hpp"
#include "swarm/pfsm/state.hpp"

namespace swarm::featnet {

using arena::AgentId;

// Input channels per entity per tick: vx, vy, px, py (standardized), one-hot state (5), time.
inline constexpr int kChannels = 10;
inline constexpr int kTimeChannel = 9;

struct FeatureConfig {
  int window{8};
  int max_teammates{10};
  int max_enemies{10};
  double sigma_floor{1e-6};
  int max_ticks{512};
};

struct AgentRecord {
  AgentId id{0};
  arena::Team team{arena::Team::kRed};
  Vec2 position;
  Vec2 velocity;
  pfsm::StateId behavior{pfsm::StateId::kSearch};
  bool alive{false};
};

// Raw world state of one tick plus who perceived whom (row = observer).
struct Snapshot {
  int tick{0};
  std::vector<AgentRecord> agents;
  std::vector<std::uint8_t> perceived;

  bool perceives(AgentId observer, AgentId target) const {
    return perceived[static_cast<std::size_t>(observer) * agents.size() +
                     static_cast<std::size_t>(target)] != 0;
  }
};

inline Snapshot take_snapshot(const arena::World& world) {
  Snapshot s;
  s.tick = world.tick;
  const std::size_t n = world.agents.size();
  s.agents.reserve(n);
  for (const auto& a : world.agents)
    s.agents.push_back({a.id, a.team, a.position, a.velocity, a.behavior, a.alive});
  s.perceived.assign(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && world.perceives(static_cast<AgentId>(i), static_cast<AgentId>(j)))
        s.perceived[i * n + j] = 1;
  return s;
}

// Observation streams of one focal agent over the input window. Every entity window is
// channels x window, oldest tick first; ticks before the episode start or where the entity
// was absent are zero columns. Absent slots are zero-padded and flagged invalid.
struct FeatureFrame {
  int tick{0};
  Eigen::MatrixXd self;
  std::vector<Eigen::MatrixXd> teammates;
  std::vector<bool> teammate_valid;
  std::vector<double> teammate_distance;
  std::vector<Eigen::MatrixXd> enemies;
  std::vector<bool> enemy_valid;

  int teammate_count() const {
    return static_cast<int>(std::count(teammate_valid.begin(), teammate_valid.end(), true));
  }
  int enemy_count() const {
    return static_cast<int>(std::count(enemy_valid.begin(), enemy_valid.end(), true));
  }
};

struct ChannelStats {
  std::array<double, 4> mean{};
  std::array<double, 4> stddev{1.0, 1.0, 1.0, 1.0};
};

// Population mean and deviation of vx, vy, px, py across the living agents of one tick.
inline ChannelStats channel_stats(const Snapshot& s, double sigma_floor) {
  ChannelStats st;
  int n = 0;
  std::array<double, 4> sum{}, sq{};
  for (const auto& a : s.agents) {
    if (!a.alive) continue;
    const std::array<double, 4> v{a.velocity.x, a.velocity.y, a.position.x, a.position.y};
    for (int c = 0; c < 4; ++c) sum[c] += v[c];
    ++n;
  }
  if (n == 0) return st;
  for (int c = 0; c < 4; ++c) st.mean[c] = sum[c] / n;
  for (const auto& a : s.agents) {
    if (!a.alive) continue;
    const std::array<double, 4> v{a.velocity.x, a.velocity.y, a.position.x, a.position.y};
    for (int c = 0; c < 4; ++c) sq[c] += (v[c] - st.mean[c]) * (v[c] - st.mean[c]);
  }
  for (int c = 0; c < 4; ++c) st.stddev[c] = std::max(std::sqrt(sq[c] / n), sigma_floor);
  return st;
}

inline void write_column(Eigen::MatrixXd& m, int col, const AgentRecord& a, const ChannelStats& st,
                         int tick, int max_ticks) {
  const std::array<double, 4> v{a.velocity.x, a.velocity.y, a.position.x, a.position.y};
  for (int c = 0; c < 4; ++c) m(c, col) = (v[c] - st.mean[c]) / st.stddev[c];
  for (int k = 0; k < 5; ++k) m(4 + k, col) = 0.0;
  m(4 + static_cast<int>(pfsm::index(a.behavior)), col) = 1.0;
  m(kTimeChannel, col) = static_cast<double>(tick) / static_cast<double>(max_ticks);
}

// Builds the focal agent's streams from the most recent snapshots (oldest first; only the
// last `cfg.window` are used). Teammates are the living teammates at the newest tick; enemies
// are those the focal agent perceives at the newest tick.
inline FeatureFrame preprocess(std::span<const Snapshot> history, AgentId focal,
                               const FeatureConfig& cfg) {
  require(!history.empty(), ErrorCode::kInvalidConfig, "preprocess needs at least one snapshot");
  if (history.size() > static_cast<std::size_t>(cfg.window))
    history = history.subspan(history.size() - static_cast<std::size_t>(cfg.window));
  const Snapshot& now = history.back();
  require(focal >= 0 && static_cast<std::size_t>(focal) < now.agents.size() &&
              now.agents[static_cast<std::size_t>(focal)].alive,
          ErrorCode::kInvalidConfig, "focal agent must be alive");
  const AgentRecord& me = now.agents[static_cast<std::size_t>(focal)];

  std::vector<std::pair<double, AgentId>> mates, foes;
  for (const auto& a : now.agents) {
    if (!a.alive || a.id == focal) continue;
    const double d = distance(me.position, a.position);
    if (a.team == me.team) mates.emplace_back(d, a.id);
    else if (now.perceives(focal, a.id)) foes.emplace_back(d, a.id);
  }
  std::sort(mates.begin(), mates.end());
  std::sort(foes.begin(), foes.end());
  if (mates.size() > static_cast<std::size_t>(cfg.max_teammates)) mates.resize(cfg.max_teammates);
  if (foes.size() > static_cast<std::size_t>(cfg.max_enemies)) foes.resize(cfg.max_enemies);

  FeatureFrame f;
  f.tick = now.tick;
  const auto zero = Eigen::MatrixXd::Zero(kChannels, cfg.window);
  f.self = zero;
  f.teammates.assign(static_cast<std::size_t>(cfg.max_teammates), zero);
  f.teammate_valid.assign(static_cast<std::size_t>(cfg.max_teammates), false);
  f.teammate_distance.assign(static_cast<std::size_t>(cfg.max_teammates), 0.0);
  f.enemies.assign(static_cast<std::size_t>(cfg.max_enemies), zero);
  f.enemy_valid.assign(static_cast<std::size_t>(cfg.max_enemies), false);
  for (std::size_t k = 0; k < mates.size(); ++k) {
    f.teammate_valid[k] = true;
    f.teammate_distance[k] = mates[k].first;
  }
  for (std::size_t k = 0; k < foes.size(); ++k) f.enemy_valid[k] = true;

  const int offset = cfg.window - static_cast<int>(history.size());
  for (std::size_t h = 0; h < history.size(); ++h) {
    const Snapshot& s = history[h];
    const ChannelStats st = channel_stats(s, cfg.sigma_floor);
    const int col = offset + static_cast<int>(h);
    const auto record = [&](AgentId id) -> const AgentRecord* {
      if (id < 0 || static_cast<std::size_t>(id) >= s.agents.size()) return nullptr;
      const AgentRecord& r = s.agents[static_cast<std::size_t>(id)];
      return r.alive ? &r : nullptr;
    };
    if (const auto* r = record(focal)) write_column(f.self, col, *r, st, s.tick, cfg.max_ticks);
    for (std::size_t k = 0; k < mates.size(); ++k)
      if (const auto* r = record(mates[k].second))
        write_column(f.teammates[k], col, *r, st, s.tick, cfg.max_ticks);
    for (std::size_t k = 0; k < foes.size(); ++k)
      if (const auto* r = record(foes[k].second); r && s.perceives(focal, foes[k].second))
        write_column(f.enemies[k], col, *r, st, s.tick, cfg.max_ticks);
  }
  return f;
}

}  // namespace swarm::featnet
