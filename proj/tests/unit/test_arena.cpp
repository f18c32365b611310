#include <gtest/gtest.h>

#include <random>

#include "swarm/arena/dynamics.hpp"
#include "swarm/arena/world.hpp"

using namespace swarm;
using namespace swarm::arena;

namespace {

AgentState agent(AgentId id, Team team, Vec2 p, Vec2 v, int missiles = 2) {
  AgentState a;
  a.id = id;
  a.team = team;
  a.position = p;
  a.velocity = v;
  a.missiles = missiles;
  return a;
}

World open_world(std::vector<AgentState> agents) {
  World w;
  w.agents = std::move(agents);
  return w;
}

}  // namespace

TEST(Dynamics, ZeroControlKeepsVelocity) {
  const ArenaConfig arena;
  const auto s = step_dynamics(agent(0, Team::kRed, {0, 0}, {1, 0}), {0, 0}, 0.1, {}, arena);
  EXPECT_DOUBLE_EQ(s.position.x, 0.1);
  EXPECT_DOUBLE_EQ(s.position.y, 0.0);
  EXPECT_DOUBLE_EQ(s.velocity.x, 1.0);
}

TEST(Dynamics, SymplecticEulerUsesUpdatedVelocity) {
  const ArenaConfig arena;
  const auto s = step_dynamics(agent(0, Team::kRed, {0, 0}, {1, 0}), {0, 1}, 0.1, {}, arena);
  EXPECT_NEAR(s.velocity.x, 1.0, 1e-15);
  EXPECT_NEAR(s.velocity.y, 0.1, 1e-15);
  EXPECT_NEAR(s.position.x, 0.1, 1e-15);
  EXPECT_NEAR(s.position.y, 0.01, 1e-15);
}

TEST(Dynamics, SpeedIsClamped) {
  const ArenaConfig arena;
  const auto s = step_dynamics(agent(0, Team::kRed, {5, 5}, {1.5, 0}), {10, 0}, 0.1, {}, arena);
  EXPECT_NEAR(s.velocity.norm(), 1.5, 1e-12);
}

TEST(Dynamics, NonFiniteControlRejected) {
  const ArenaConfig arena;
  try {
    step_dynamics(agent(0, Team::kRed, {5, 5}, {0, 0}), {std::nan(""), 0}, 0.1, {}, arena);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidControl);
  }
}

TEST(Dynamics, StaysInBoundsAndOutOfObstacles) {
  ArenaConfig arena;
  arena.obstacles.push_back(ConvexPolygon::rectangle(10, 5, 12, 10));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-20, 20);
  AgentState a = agent(0, Team::kRed, {9, 7}, {0, 0});
  KinematicLimits limits;
  for (int t = 0; t < 5000; ++t) {
    a = step_dynamics(a, {u(rng), u(rng)}, 0.1, limits, arena);
    ASSERT_TRUE(arena.inside_bounds(a.position));
    ASSERT_FALSE(arena.in_obstacle(a.position));
    ASSERT_LE(a.velocity.norm(), limits.max_speed + 1e-9);
  }
}

TEST(Dynamics, EnergyConservedWithoutControl) {
  ArenaConfig arena;
  arena.width = arena.height = 1e6;
  AgentState a = agent(0, Team::kRed, {10, 10}, {0.3, 1.2});
  const double speed = a.velocity.norm();
  for (int t = 0; t < 1000; ++t) a = step_dynamics(a, {0, 0}, 0.1, {}, arena);
  EXPECT_NEAR(a.velocity.norm(), speed, 1e-12);
}

TEST(Dynamics, DeadAgentsAreFrozen) {
  const ArenaConfig arena;
  AgentState a = agent(0, Team::kRed, {3, 3}, {0, 0});
  a.alive = false;
  const auto s = step_dynamics(a, {5, 5}, 0.1, {}, arena);
  EXPECT_EQ(s.position, a.position);
}

TEST(Geometry, ThreeFourFiveTriangle) {
  const auto g = relative_geometry(agent(0, Team::kRed, {0, 0}, {1, 0}), agent(1, Team::kBlue, {3, 4}, {0, 0}));
  EXPECT_DOUBLE_EQ(g.distance, 5.0);
  EXPECT_NEAR(g.angle, 0.9273, 1e-4);
  EXPECT_NEAR(g.angle, std::acos(0.6), 1e-15);
}

TEST(Geometry, AlignedBehindAndStationary) {
  const auto ahead = relative_geometry(agent(0, Team::kRed, {0, 0}, {1, 0}), agent(1, Team::kBlue, {1, 0}, {}));
  EXPECT_DOUBLE_EQ(ahead.distance, 1.0);
  EXPECT_DOUBLE_EQ(ahead.angle, 0.0);
  const auto behind = relative_geometry(agent(0, Team::kRed, {0, 0}, {1, 0}), agent(1, Team::kBlue, {-1, 0}, {}));
  EXPECT_DOUBLE_EQ(behind.angle, M_PI);
  const auto still = relative_geometry(agent(0, Team::kRed, {0, 0}, {0, 0}), agent(1, Team::kBlue, {1, 0}, {}));
  EXPECT_DOUBLE_EQ(still.angle, M_PI);
}

TEST(Geometry, PerceptionRadiusInclusive) {
  const SensorSpec s;
  const auto obs = agent(0, Team::kRed, {0, 0}, {1, 0});
  EXPECT_TRUE(in_perception(obs, agent(1, Team::kBlue, {1.9, 0}, {}), s));
  EXPECT_FALSE(in_perception(obs, agent(1, Team::kBlue, {2.1, 0}, {}), s));
  EXPECT_TRUE(in_perception(obs, agent(1, Team::kBlue, {2.0, 0}, {}), s));
  EXPECT_TRUE(in_perception(obs, agent(1, Team::kBlue, {-2.0, 0}, {}), s));
}

TEST(Geometry, AttackSector) {
  const SensorSpec s;
  const auto obs = agent(0, Team::kRed, {0, 0}, {1, 0});
  EXPECT_TRUE(in_attack_sector(obs, agent(1, Team::kBlue, {1, 0}, {}), s));
  EXPECT_FALSE(in_attack_sector(obs, agent(1, Team::kBlue, {std::cos(M_PI / 4), std::sin(M_PI / 4)}, {}), s));
  EXPECT_FALSE(in_attack_sector(obs, agent(1, Team::kBlue, {1.6, 0}, {}), s));
  EXPECT_TRUE(in_attack_sector(obs, agent(1, Team::kBlue, {1.5, 0}, {}), s));
  EXPECT_FALSE(in_attack_sector(agent(0, Team::kRed, {0, 0}, {0, 0}), agent(1, Team::kBlue, {1, 0}, {}), s));
}

TEST(Missiles, FireAtInSectorTarget) {
  World w = open_world({agent(0, Team::kRed, {0, 0}, {1, 0}), agent(1, Team::kBlue, {1, 0}, {1, 0})});
  const std::vector<FireCommand> cmd{{0, 1}};
  const auto r = resolve_missiles(w, cmd);
  ASSERT_EQ(r.kills.size(), 1u);
  EXPECT_FALSE(w.agent(1).alive);
  EXPECT_EQ(w.agent(0).missiles, 1);
  EXPECT_EQ(w.agent(0).cooldown, w.limits.missile_cooldown_ticks);
}

TEST(Missiles, OutOfSectorIgnored) {
  World w = open_world({agent(0, Team::kRed, {0, 0}, {1, 0}), agent(1, Team::kBlue, {-1, 0}, {1, 0})});
  const std::vector<FireCommand> cmd{{0, 1}};
  const auto r = resolve_missiles(w, cmd);
  EXPECT_TRUE(r.kills.empty());
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_EQ(r.rejected[0].reason, RejectReason::kOutOfSector);
  EXPECT_TRUE(w.agent(1).alive);
}

TEST(Missiles, MutualFireDestroysBoth) {
  World w = open_world({agent(0, Team::kRed, {0, 0}, {1, 0}), agent(1, Team::kBlue, {1, 0}, {-1, 0})});
  const std::vector<FireCommand> cmd{{0, 1}, {1, 0}};
  const auto r = resolve_missiles(w, cmd);
  EXPECT_EQ(r.kills.size(), 2u);
  EXPECT_FALSE(w.agent(0).alive);
  EXPECT_FALSE(w.agent(1).alive);
  EXPECT_EQ(check_termination(w), Outcome::kDraw);
}

TEST(Missiles, EmptyMagazineAndCooldownRejected) {
  World w = open_world({agent(0, Team::kRed, {0, 0}, {1, 0}, 0), agent(1, Team::kRed, {0, 1}, {1, 0}),
                        agent(2, Team::kBlue, {1, 0}, {1, 0})});
  w.agent(1).cooldown = 3;
  w.agent(1).position = {0, 0.2};
  const std::vector<FireCommand> cmd{{0, 2}, {1, 2}};
  const auto r = resolve_missiles(w, cmd);
  EXPECT_TRUE(r.kills.empty());
  ASSERT_EQ(r.rejected.size(), 2u);
  EXPECT_EQ(r.rejected[0].reason, RejectReason::kNoMissiles);
  EXPECT_EQ(r.rejected[1].reason, RejectReason::kCoolingDown);
}

TEST(Missiles, ObstacleBlocksLineOfSight) {
  World w = open_world({agent(0, Team::kRed, {1, 1}, {1, 0}), agent(1, Team::kBlue, {2.4, 1}, {1, 0})});
  w.config.obstacles.push_back(ConvexPolygon::rectangle(1.5, 0.5, 1.8, 1.5));
  const std::vector<FireCommand> cmd{{0, 1}};
  const auto r = resolve_missiles(w, cmd);
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_EQ(r.rejected[0].reason, RejectReason::kBlocked);
}

TEST(Termination, Rules) {
  World w = open_world({agent(0, Team::kRed, {1, 1}, {}), agent(1, Team::kRed, {2, 1}, {}),
                        agent(2, Team::kBlue, {5, 5}, {})});
  EXPECT_EQ(check_termination(w), Outcome::kOngoing);
  w.tick = w.config.max_ticks;
  EXPECT_EQ(check_termination(w), Outcome::kDraw);
  w.agent(2).alive = false;
  EXPECT_EQ(check_termination(w), Outcome::kRedWin);
  w.agent(0).alive = w.agent(1).alive = false;
  EXPECT_EQ(check_termination(w), Outcome::kDraw);
  w.agent(2).alive = true;
  EXPECT_EQ(check_termination(w), Outcome::kBlueWin);
}

TEST(Polygon, ValidationAndContainment) {
  EXPECT_THROW(ConvexPolygon({{0, 0}, {1, 0}}), Error);
  EXPECT_THROW(ConvexPolygon({{0, 0}, {2, 0}, {1, 0.2}, {2, 2}, {0, 2}}), Error);
  const auto r = ConvexPolygon::rectangle(0, 0, 2, 1);
  EXPECT_TRUE(r.contains({1, 0.5}));
  EXPECT_FALSE(r.contains({2, 0.5}));
  EXPECT_TRUE(r.blocks_segment({-1, 0.5}, {3, 0.5}));
  EXPECT_FALSE(r.blocks_segment({-1, 1.0}, {3, 1.0}));
  EXPECT_NEAR(r.distance_to({3, 0.5}), 1.0, 1e-15);
}

TEST(ArenaConfig, RejectsOverlappingObstacles) {
  ArenaConfig a;
  a.obstacles = {ConvexPolygon::rectangle(1, 1, 3, 3), ConvexPolygon::rectangle(2, 2, 4, 4)};
  EXPECT_THROW(a.validate(), Error);
  a.obstacles = {ConvexPolygon::rectangle(1, 1, 3, 3), ConvexPolygon::rectangle(3, 1, 4, 3)};
  EXPECT_NO_THROW(a.validate());
}
