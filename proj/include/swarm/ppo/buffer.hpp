#pragma once

#include <Eigen/Core>
#include <vector>

namespace swarm::ppo {

// One decision of one agent. `Input` is whatever the actor needs to recompute the
// transition matrix; `critic_input` is the fixed feature vector the critic scores.
template <class Input>
struct Transition {
  Input input;
  Eigen::VectorXd critic_input;
  int state{0};
  int next_state{0};
  int goal{0};
  Eigen::MatrixXd p_old;  // full matrix at collection time
  double prob_old{1.0};   // p_old(state, next_state)
  double reward{0.0};
  double value{0.0};       // V(s_t, P) at collection time
  double next_value{0.0};  // bootstrap value of the successor
  double delta_p{0.0};     // transition-variance statistic
  bool done{false};        // terminal: no bootstrap
  bool segment_end{false}; // last stored step of this agent's trajectory
};

template <class Input>
using RolloutBuffer = std::vector<Transition<Input>>;

}  // namespace swarm::ppo
