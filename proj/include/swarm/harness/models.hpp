#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "swarm/featnet/network.hpp"
#include "swarm/harness/config.hpp"
#include "swarm/pfsm/observation.hpp"
#include "swarm/ppo/linear_policy.hpp"
#include "swarm/ppo/value.hpp"

namespace swarm::harness {

using Eigen::VectorXd;

// Compact hand-made situation summary used by the PFSM-RL arm.
inline constexpr int kRlFeatures = 14;

inline VectorXd rl_features(const pfsm::Observation& obs, const ExperimentConfig& cfg) {
  VectorXd f = VectorXd::Zero(kRlFeatures);
  f(0) = 1.0;
  f(1 + static_cast<int>(pfsm::index(obs.current))) = 1.0;
  const double r_d = cfg.sensors.perception_radius;
  if (!obs.enemies.empty()) {
    const auto& e = obs.enemies.front();
    f(6) = 1.0;
    f(7) = std::min<double>(obs.enemies.size(), 3) / 3.0;
    f(8) = e.distance / r_d;
    f(9) = std::cos(e.my_angle);
    f(10) = std::cos(e.their_angle);
  } else {
    f(8) = 1.0;
  }
  f(11) = cfg.limits.max_missiles > 0 ? static_cast<double>(obs.missiles) / cfg.limits.max_missiles : 0.0;
  f(12) = obs.teammate_within(cfg.rules.teammate_range) ? 1.0 : 0.0;
  f(13) = obs.help_signal() ? 1.0 : 0.0;
  return f;
}

// V(s, P): flattened matrix and one-hot current state, optionally prefixed by the actor's
// features.
inline VectorXd critic_input(const VectorXd& features, const pfsm::Matrix5& p, pfsm::StateId s,
                             bool with_features) {
  const Eigen::Index f = with_features ? features.size() : 0;
  VectorXd x(f + 25 + 5);
  if (with_features) x.head(f) = features;
  x.segment(f, 25) = Eigen::Map<const VectorXd>(p.data(), 25);
  x.tail(5).setZero();
  x(f + 25 + static_cast<Eigen::Index>(pfsm::index(s))) = 1.0;
  return x;
}

inline int critic_width(int features, const ExperimentConfig& cfg) {
  return (cfg.harness.critic_features ? features : 0) + 30;
}

struct DrlModel {
  featnet::CompoundNetwork net;
  ppo::MlpValue critic;
  pfsm::TopologyMask mask;

  explicit DrlModel(const ExperimentConfig& cfg)
      : net(cfg.network),
        critic(critic_width(cfg.network.fused_width(), cfg), cfg.harness.critic_hidden, cfg.network.init_seed + 101),
        mask(cfg.pfsm.mask) {}
};

struct RlModel {
  ppo::LinearPolicy policy;
  ppo::MlpValue critic;

  explicit RlModel(const ExperimentConfig& cfg)
      : policy(kRlFeatures, cfg.pfsm.mask, 0.01, cfg.network.init_seed + 7),
        critic(critic_width(kRlFeatures, cfg), cfg.harness.critic_hidden, cfg.network.init_seed + 102) {}
};

struct DrlInput {
  featnet::FeatureFrame frame;
  featnet::StreamState state;
};

// Trainer view of the compound network.
class DrlActor {
 public:
  using Input = DrlInput;
  struct Cache {
    featnet::CompoundNetwork::Cache net;
  };

  DrlActor(featnet::CompoundNetwork& net, const pfsm::TopologyMask& mask) : net_(net), mask_(mask) {}

  pfsm::Matrix5 forward(const Input& in, Cache& k) const {
    return net_.forward(in.frame, in.state, mask_, &k.net).p.matrix();
  }
  void backward(const Cache& k, const pfsm::Matrix5& dp) { net_.backward(k.net, dp); }

  template <class F>
  void for_each_parameter(F&& f) {
    net_.for_each_parameter(f);
  }

 private:
  featnet::CompoundNetwork& net_;
  pfsm::TopologyMask mask_;
};

}  // namespace swarm::harness
