#pragma once

#include <deque>
#include <optional>
#include <span>

#include "swarm/pfsm/transition.hpp"
#include "swarm/ppo/config.hpp"

namespace swarm::ppo {

// Population variance.
inline double window_variance(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return var / static_cast<double>(xs.size());
}

// Sliding window over the probabilities of the edges an agent actually executed.
class EdgeHistory {
 public:
  explicit EdgeHistory(int window = 8) : window_(window) {}

  void push(double p) {
    values_.push_back(p);
    while (static_cast<int>(values_.size()) > window_) values_.pop_front();
  }
  double variance() const {
    std::vector<double> v(values_.begin(), values_.end());
    return window_variance(v);
  }
  std::vector<double> values() const { return {values_.begin(), values_.end()}; }
  void clear() { values_.clear(); }

 private:
  int window_;
  std::deque<double> values_;
};

// Indicator of a row whose off-diagonal (outgoing) mass is at most the threshold.
inline bool deadlock_indicator(const pfsm::TransitionMatrix& p, pfsm::StateId state,
                               double threshold) {
  double outgoing = 0.0;
  for (pfsm::StateId s : pfsm::kAllStates)
    if (s != state) outgoing += p(state, s);
  return outgoing <= threshold;
}

struct RewardInputs {
  pfsm::StateId current{pfsm::StateId::kSearch};
  pfsm::StateId next{pfsm::StateId::kSearch};
  std::optional<pfsm::StateId> goal;
  std::span<const pfsm::Action> executed_actions;
  const pfsm::TransitionMatrix* p{nullptr};
  // Executed-edge probabilities of the last W ticks, current tick last.
  std::span<const double> edge_window;
};

struct RewardTerms {
  double task{0.0};
  double deadlock{0.0};
  double jitter{0.0};
  double edge_variance{0.0};
  bool deadlock_fired{false};
  double total{0.0};
};

// R = R_t - lambda_d R_d - lambda_j R_j with
//   R_t = r_goal * P(s_t, s_g) - r_c(a_t)
//   R_d = r_d * 1[outgoing mass of row s_{t+1} <= delta]
//   R_j = r_j * Var(executed-edge probability over the window)
inline RewardTerms compute_reward(const RewardInputs& in, const RewardConfig& cfg) {
  require(in.goal.has_value(), ErrorCode::kInvalidConfig, "reward needs a goal-state label");
  require(in.p != nullptr, ErrorCode::kInvalidConfig, "reward needs the transition matrix");
  RewardTerms r;
  double cost = 0.0;
  for (pfsm::Action a : in.executed_actions) cost += cfg.action_cost[static_cast<std::size_t>(a)];
  r.task = cfg.goal_reward * (*in.p)(in.current, *in.goal) - cost;
  r.deadlock_fired = deadlock_indicator(*in.p, in.next, cfg.deadlock_threshold);
  r.deadlock = r.deadlock_fired ? cfg.deadlock_penalty : 0.0;
  r.edge_variance = window_variance(in.edge_window);
  r.jitter = cfg.jitter_penalty * r.edge_variance;
  r.total = r.task - cfg.deadlock_weight * r.deadlock - cfg.jitter_weight * r.jitter;
  return r;
}

}  // namespace swarm::ppo
