#pragma once

#include <cmath>
#include <vector>

#include "swarm/ppo/buffer.hpp"
#include "swarm/ppo/config.hpp"

namespace swarm::ppo {

// Generalized advantage estimation over TD residuals
// delta_t = r_t + gamma V(s_{t+1}) - V(s_t); with gae_lambda = 0 it is the one-step advantage.
// Trajectory segments are delimited by `segment_end`.
template <class Input>
std::vector<double> advantage(const RolloutBuffer<Input>& buffer, const PpoConfig& cfg) {
  std::vector<double> adv(buffer.size(), 0.0);
  double running = 0.0;
  for (std::size_t k = buffer.size(); k-- > 0;) {
    const auto& t = buffer[k];
    const double bootstrap = t.done ? 0.0 : cfg.gamma * t.next_value;
    const double delta = t.reward + bootstrap - t.value;
    if (t.segment_end) running = 0.0;
    running = delta + cfg.gamma * cfg.gae_lambda * running;
    adv[k] = running;
  }
  return adv;
}

// Critic target with the transition-uncertainty correction:
// V_t = r_t + gamma V(s_{t+1}) + eta * dP; terminal steps drop the bootstrap.
inline double critic_target(double reward, double next_value, double delta_p, bool terminal,
                            const PpoConfig& cfg) {
  return reward + (terminal ? 0.0 : cfg.gamma * next_value) + cfg.uncertainty_scale * delta_p;
}

inline void normalize_in_place(std::vector<double>& xs) {
  if (xs.size() < 2) return;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(xs.size()));
  for (double& x : xs) x = (x - mean) / (sd + 1e-8);
}

}  // namespace swarm::ppo
