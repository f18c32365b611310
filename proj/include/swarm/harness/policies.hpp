#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "swarm/arena/world.hpp"
#include "swarm/featnet/features.hpp"
#include "swarm/harness/config.hpp"
#include "swarm/harness/models.hpp"
#include "swarm/pfsm/rules.hpp"
#include "swarm/ppo/buffer.hpp"
#include "swarm/ppo/reward.hpp"

namespace swarm::harness {

using arena::AgentId;

struct TickContext {
  const arena::World& world;
  std::span<const pfsm::Observation> obs;         // indexed by agent id
  std::span<const featnet::Snapshot> history;     // oldest first, current tick last
  const ExperimentConfig& cfg;
};

struct StepResult {
  int tick{0};
  std::vector<bool> launched;  // per agent
  std::vector<bool> died;      // killed during this tick
  arena::Outcome outcome{arena::Outcome::kOngoing};
  bool timeout{false};         // ended by the tick limit
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyKind kind() const = 0;
  virtual bool moves() const { return true; }
  // Whether Search agents chase the team's last enemy sighting instead of patrolling.
  virtual bool uses_sightings() const { return true; }
  virtual void begin_episode(const arena::World&) {}
  virtual pfsm::StateId decide(const TickContext& ctx, AgentId id) = 0;
  virtual void end_step(const StepResult&) {}
};

class FsmPolicy : public Policy {
 public:
  PolicyKind kind() const override { return PolicyKind::kFsm; }
  pfsm::StateId decide(const TickContext& ctx, AgentId id) override {
    return pfsm::fsm_baseline_policy(ctx.obs[static_cast<std::size_t>(id)], ctx.cfg.rules, ctx.cfg.pfsm.mask);
  }
};

class OraclePolicy : public Policy {
 public:
  PolicyKind kind() const override { return PolicyKind::kOracle; }
  pfsm::StateId decide(const TickContext& ctx, AgentId id) override {
    const auto& o = ctx.obs[static_cast<std::size_t>(id)];
    return pfsm::constrain_to_mask(o.current, pfsm::goal_state(o), ctx.cfg.pfsm.mask);
  }
};

// Stateless rules; "fire" executes as Track, everything else as Search. Without memory it
// patrols rather than following up old sightings.
class IfElsePolicy : public Policy {
 public:
  PolicyKind kind() const override { return PolicyKind::kIfElse; }
  bool uses_sightings() const override { return false; }
  pfsm::StateId decide(const TickContext& ctx, AgentId id) override {
    const auto d = pfsm::if_else_baseline_policy(ctx.obs[static_cast<std::size_t>(id)]);
    return d.kind == pfsm::IfElseDecision::Kind::kFire ? pfsm::StateId::kTrack : pfsm::StateId::kSearch;
  }
};

// Scripted: holds its state, never moves or fires.
class IdlePolicy : public Policy {
 public:
  PolicyKind kind() const override { return PolicyKind::kIdle; }
  bool moves() const override { return false; }
  pfsm::StateId decide(const TickContext& ctx, AgentId id) override {
    return ctx.world.agent(id).behavior;
  }
};

struct RewardSummary {
  double total{0.0};
  double total_sq{0.0};
  int steps{0};
  int deadlock_fired{0};
  double mean() const { return steps ? total / steps : 0.0; }
  double stddev() const {
    if (steps < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, (total_sq - steps * m * m) / (steps - 1)));
  }
};

// Turns one team's decisions into PPO transitions. Rewards are completed once the tick has
// resolved, since the launch cost depends on whether a missile actually left.
template <class Input, class Critic>
class Recorder {
 public:
  using Sample = ppo::Transition<Input>;

  Recorder(const Critic& critic, const ppo::RewardConfig& reward, bool critic_features = false)
      : critic_(critic), reward_(reward), critic_features_(critic_features) {}

  void begin(int agents) {
    traj_.assign(static_cast<std::size_t>(agents), {});
    edges_.assign(static_cast<std::size_t>(agents), ppo::EdgeHistory(reward_.jitter_window));
    open_.assign(static_cast<std::size_t>(agents), false);
    pending_.assign(static_cast<std::size_t>(agents), false);
    summary_ = {};
  }

  void record(AgentId id, Input input, const VectorXd& features, const pfsm::TransitionMatrix& p,
              pfsm::StateId s, pfsm::StateId next, pfsm::StateId goal) {
    const auto k = static_cast<std::size_t>(id);
    Sample t;
    t.input = std::move(input);
    t.critic_input = critic_input(features, p.matrix(), s, critic_features_);
    typename Critic::Cache cache;
    t.value = critic_.forward(t.critic_input, cache);
    if (open_[k]) traj_[k].back().next_value = t.value;
    t.state = static_cast<int>(pfsm::index(s));
    t.next_state = static_cast<int>(pfsm::index(next));
    t.goal = static_cast<int>(pfsm::index(goal));
    t.p_old = p.matrix();
    t.prob_old = p(s, next);
    edges_[k].push(t.prob_old);
    t.delta_p = edges_[k].variance();
    traj_[k].push_back(std::move(t));
    open_[k] = true;
    pending_[k] = true;
  }

  void end_step(const StepResult& r) {
    for (std::size_t k = 0; k < traj_.size(); ++k) {
      if (!pending_[k]) continue;
      pending_[k] = false;
      Sample& t = traj_[k].back();
      const auto cur = pfsm::state_from_index(static_cast<std::size_t>(t.state));
      const auto next = pfsm::state_from_index(static_cast<std::size_t>(t.next_state));
      std::vector<pfsm::Action> actions;
      for (pfsm::Action a : pfsm::actions_for(next))
        if (a != pfsm::Action::kLaunchMissiles || r.launched[k]) actions.push_back(a);
      const pfsm::TransitionMatrix p(t.p_old);
      const auto window = edges_[k].values();
      ppo::RewardInputs in;
      in.current = cur;
      in.next = next;
      in.goal = pfsm::state_from_index(static_cast<std::size_t>(t.goal));
      in.executed_actions = actions;
      in.p = &p;
      in.edge_window = window;
      const auto terms = ppo::compute_reward(in, reward_);
      t.reward = terms.total;
      summary_.total += terms.total;
      summary_.total_sq += terms.total * terms.total;
      ++summary_.steps;
      if (terms.deadlock_fired) ++summary_.deadlock_fired;
      if (r.died[k] || (r.outcome != arena::Outcome::kOngoing && !r.timeout)) {
        t.done = true;
        t.next_value = 0.0;
        open_[k] = false;
      } else if (r.outcome != arena::Outcome::kOngoing) {
        t.next_value = t.value;  // cut by the tick limit: bootstrap from the last estimate
        open_[k] = false;
      }
    }
  }

  // Agent trajectories back to back, each closed by a segment marker.
  std::vector<Sample> take() {
    std::vector<Sample> out;
    for (auto& tr : traj_) {
      if (tr.empty()) continue;
      tr.back().segment_end = true;
      for (auto& t : tr) out.push_back(std::move(t));
      tr.clear();
    }
    return out;
  }

  const RewardSummary& summary() const { return summary_; }

 private:
  const Critic& critic_;
  ppo::RewardConfig reward_;
  bool critic_features_;
  std::vector<std::vector<Sample>> traj_;
  std::vector<ppo::EdgeHistory> edges_;
  std::vector<bool> open_;
  std::vector<bool> pending_;
  RewardSummary summary_;
};

class DrlPolicy : public Policy {
 public:
  using Rec = Recorder<DrlInput, ppo::MlpValue>;

  DrlPolicy(const DrlModel& model, Rec* recorder = nullptr) : model_(model), recorder_(recorder) {}

  PolicyKind kind() const override { return PolicyKind::kPfsmDrl; }

  void begin_episode(const arena::World& w) override {
    streams_.assign(w.agents.size(), model_.net.initial_state());
  }

  pfsm::StateId decide(const TickContext& ctx, AgentId id) override {
    const auto k = static_cast<std::size_t>(id);
    const auto& obs = ctx.obs[k];
    featnet::FeatureFrame frame = featnet::preprocess(ctx.history, id, ctx.cfg.network.features);
    const auto out = model_.net.forward(frame, streams_[k], model_.mask);
    const pfsm::StateId next = pfsm::next_state(obs.current, out.p);
    if (recorder_)
      recorder_->record(id, DrlInput{std::move(frame), streams_[k]}, out.z, out.p, obs.current, next,
                        pfsm::goal_state(obs));
    streams_[k] = out.next;
    return next;
  }

  void end_step(const StepResult& r) override {
    if (recorder_) recorder_->end_step(r);
    for (std::size_t k = 0; k < r.died.size() && k < streams_.size(); ++k)
      if (r.died[k]) streams_[k] = model_.net.initial_state();
  }

 private:
  const DrlModel& model_;
  Rec* recorder_;
  std::vector<featnet::StreamState> streams_;
};

class RlPolicy : public Policy {
 public:
  using Rec = Recorder<VectorXd, ppo::MlpValue>;

  RlPolicy(const RlModel& model, Rec* recorder = nullptr) : model_(model), recorder_(recorder) {}

  PolicyKind kind() const override { return PolicyKind::kPfsmRl; }

  pfsm::StateId decide(const TickContext& ctx, AgentId id) override {
    const auto& obs = ctx.obs[static_cast<std::size_t>(id)];
    const VectorXd phi = rl_features(obs, ctx.cfg);
    const auto p = model_.policy.forward(phi);
    const pfsm::StateId next = pfsm::next_state(obs.current, p);
    if (recorder_) recorder_->record(id, phi, phi, p, obs.current, next, pfsm::goal_state(obs));
    return next;
  }

  void end_step(const StepResult& r) override {
    if (recorder_) recorder_->end_step(r);
  }

 private:
  const RlModel& model_;
  Rec* recorder_;
};

}  // namespace swarm::harness
