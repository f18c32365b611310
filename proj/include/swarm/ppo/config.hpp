#pragma once

#include <array>
#include <string>

#include "swarm/core/error.hpp"
#include "swarm/pfsm/state.hpp"

namespace swarm::ppo {

enum class OptimizerKind { kSgd, kAdam };

struct PpoConfig {
  double gamma{0.98};
  double gae_lambda{0.95};
  double clip_epsilon{0.2};
  double actor_lr{1e-4};
  double critic_lr{1e-3};
  double l1_weight{0.01};         // lambda_1, entrywise |P|_1
  double frobenius_weight{0.01};  // lambda_2, |P - P_prev|_F^2
  double uncertainty_scale{0.1};  // eta, critic-target correction
  int episodes{100};
  int max_steps{512};
  int epochs{4};
  int minibatch_size{256};  // 0 = whole batch
  double max_grad_norm{0.5};  // 0 disables clipping
  bool normalize_advantages{true};
  // Add the matrix regularizers to the maximised objective exactly as written instead of
  // subtracting them as penalties.
  bool literal_signs{false};
  OptimizerKind optimizer{OptimizerKind::kAdam};

  void validate() const {
    require(gamma >= 0.0 && gamma <= 1.0, ErrorCode::kInvalidConfig, "gamma must be in [0, 1]");
    require(gae_lambda >= 0.0 && gae_lambda <= 1.0, ErrorCode::kInvalidConfig,
            "gae_lambda must be in [0, 1]");
    require(clip_epsilon > 0.0, ErrorCode::kInvalidConfig, "clip epsilon must be positive");
    require(actor_lr > 0.0 && critic_lr > 0.0, ErrorCode::kInvalidConfig,
            "step sizes must be positive");
    require(l1_weight >= 0.0 && frobenius_weight >= 0.0 && uncertainty_scale >= 0.0,
            ErrorCode::kInvalidConfig, "regularizer weights must be non-negative");
    require(epochs >= 1 && minibatch_size >= 0, ErrorCode::kInvalidConfig,
            "epochs must be >= 1 and minibatch size >= 0");
    require(episodes >= 0 && max_steps >= 1, ErrorCode::kInvalidConfig,
            "episodes and max_steps must be positive");
    require(max_grad_norm >= 0.0, ErrorCode::kInvalidConfig, "max_grad_norm must be >= 0");
  }
};

struct RewardConfig {
  double deadlock_weight{0.5};  // lambda_d
  double jitter_weight{0.5};    // lambda_j
  double goal_reward{1.0};      // coefficient on P(s_t, s_g)
  double deadlock_penalty{1.0};
  double jitter_penalty{1.0};
  int jitter_window{8};
  double deadlock_threshold{1e-3};
  std::array<double, pfsm::kNumActions> action_cost = [] {
    std::array<double, pfsm::kNumActions> c{};
    c[static_cast<std::size_t>(pfsm::Action::kLaunchMissiles)] = 0.01;
    return c;
  }();

  void validate() const {
    require(deadlock_weight >= 0.0 && jitter_weight >= 0.0 && goal_reward >= 0.0 &&
                deadlock_penalty >= 0.0 && jitter_penalty >= 0.0,
            ErrorCode::kInvalidConfig, "reward coefficients must be non-negative");
    for (double c : action_cost)
      require(c >= 0.0, ErrorCode::kInvalidConfig, "action costs must be non-negative");
    require(jitter_window >= 2, ErrorCode::kInvalidConfig, "jitter window must be >= 2");
    require(deadlock_threshold >= 0.0 && deadlock_threshold <= 0.1, ErrorCode::kInvalidConfig,
            "deadlock threshold must be in [0, 0.1]");
  }
};

}  // namespace swarm::ppo
