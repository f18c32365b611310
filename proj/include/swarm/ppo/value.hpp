#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>

#include "swarm/featnet/layers.hpp"

namespace swarm::ppo {

using featnet::Linear;
using featnet::Tensor;
using Eigen::VectorXd;

// V(x) = w . x + b
class LinearValue {
 public:
  struct Cache {
    VectorXd x;
  };

  explicit LinearValue(int inputs = 1) : layer_(inputs, 1) {}

  int inputs() const { return layer_.in_features(); }
  double forward(const VectorXd& x, Cache& k) const {
    k.x = x;
    return layer_.forward(x)(0);
  }
  void backward(const Cache& k, double dv) { layer_.backward_params(k.x, VectorXd::Constant(1, dv)); }

  Linear& layer() { return layer_; }
  const Linear& layer() const { return layer_; }

  template <class F>
  void for_each_parameter(F&& f) {
    f(std::string("value.weight"), layer_.weight);
    f(std::string("value.bias"), layer_.bias);
  }
  template <class F>
  void for_each_parameter(F&& f) const {
    f(std::string("value.weight"), layer_.weight);
    f(std::string("value.bias"), layer_.bias);
  }

 private:
  Linear layer_;
};

// One tanh hidden layer.
class MlpValue {
 public:
  struct Cache {
    VectorXd x, h;
  };

  MlpValue(int inputs = 1, int hidden = 128, std::uint64_t seed = 7) : l1_(inputs, hidden), l2_(hidden, 1) {
    std::mt19937_64 rng(seed);
    l1_.init(rng);
    l2_.init(rng);
  }

  int inputs() const { return l1_.in_features(); }
  int hidden() const { return l1_.out_features(); }

  double forward(const VectorXd& x, Cache& k) const {
    k.x = x;
    k.h = featnet::tanh_forward(l1_.forward(x));
    return l2_.forward(k.h)(0);
  }
  void backward(const Cache& k, double dv) {
    const VectorXd dh = l2_.backward(k.h, VectorXd::Constant(1, dv));
    l1_.backward_params(k.x, featnet::tanh_backward(k.h, dh));
  }

  template <class F>
  void for_each_parameter(F&& f) {
    visit(*this, f);
  }
  template <class F>
  void for_each_parameter(F&& f) const {
    visit(*this, f);
  }

 private:
  template <class Self, class F>
  static void visit(Self& s, F& f) {
    f(std::string("value.hidden.weight"), s.l1_.weight);
    f(std::string("value.hidden.bias"), s.l1_.bias);
    f(std::string("value.out.weight"), s.l2_.weight);
    f(std::string("value.out.bias"), s.l2_.bias);
  }

  Linear l1_, l2_;
};

}  // namespace swarm::ppo
