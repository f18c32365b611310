#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>

#include "swarm/featnet/layers.hpp"
#include "swarm/featnet/network.hpp"
#include "swarm/pfsm/transition.hpp"

namespace swarm::ppo {

using featnet::Tensor;

// Transition matrix from a linear map of a feature vector: logits = W phi, then the masked
// row softmax. With phi = one_hot(state) this is a tabular policy.
class LinearPolicy {
 public:
  using Input = Eigen::VectorXd;
  struct Cache {
    Eigen::VectorXd phi;
    pfsm::Matrix5 p;
  };

  LinearPolicy(int features = 1, pfsm::TopologyMask mask = {}, double init_scale = 0.0,
               std::uint64_t seed = 3)
      : weight_(25, features), mask_(mask) {
    mask_.validate();
    if (init_scale > 0.0) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> n(0.0, init_scale);
      for (Eigen::Index i = 0; i < weight_.value.size(); ++i) weight_.value.data()[i] = n(rng);
    }
  }

  int features() const { return static_cast<int>(weight_.value.cols()); }
  const pfsm::TopologyMask& mask() const { return mask_; }
  Tensor& weight() { return weight_; }
  const Tensor& weight() const { return weight_; }

  pfsm::Matrix5 logits(const Eigen::VectorXd& phi) const {
    const Eigen::VectorXd flat = weight_.value * phi;
    return Eigen::Map<const pfsm::Matrix5>(flat.data());
  }

  pfsm::TransitionMatrix forward(const Eigen::VectorXd& phi) const {
    return featnet::masked_row_softmax(logits(phi), mask_);
  }

  pfsm::Matrix5 forward(const Eigen::VectorXd& phi, Cache& k) const {
    k.phi = phi;
    k.p = forward(phi).matrix();
    return k.p;
  }

  void backward(const Cache& k, const pfsm::Matrix5& dp) {
    const pfsm::Matrix5 dl = featnet::masked_row_softmax_backward(k.p, dp);
    const Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(dl.data(), 25);
    weight_.grad.noalias() += flat * k.phi.transpose();
  }

  template <class F>
  void for_each_parameter(F&& f) {
    f(std::string("linear.weight"), weight_);
  }
  template <class F>
  void for_each_parameter(F&& f) const {
    f(std::string("linear.weight"), weight_);
  }

 private:
  Tensor weight_;
  pfsm::TopologyMask mask_;
};

}  // namespace swarm::ppo
