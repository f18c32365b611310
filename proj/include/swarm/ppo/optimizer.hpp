#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "swarm/featnet/layers.hpp"
#include "swarm/ppo/config.hpp"

namespace swarm::ppo {

using featnet::Tensor;

// Gradient-descent optimizer over a fixed list of tensors (callers negate for ascent).
class Optimizer {
 public:
  Optimizer(std::vector<Tensor*> params, OptimizerKind kind, double lr)
      : params_(std::move(params)), kind_(kind), lr_(lr) {
    for (Tensor* t : params_) {
      m_.push_back(Eigen::MatrixXd::Zero(t->value.rows(), t->value.cols()));
      v_.push_back(Eigen::MatrixXd::Zero(t->value.rows(), t->value.cols()));
    }
  }

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  const std::vector<Tensor*>& params() const { return params_; }

  double grad_norm() const {
    double s = 0.0;
    for (const Tensor* t : params_) s += t->grad.squaredNorm();
    return std::sqrt(s);
  }

  // Rescales gradients to `max_norm`; returns true when clipping happened.
  bool clip_grad_norm(double max_norm) {
    if (max_norm <= 0.0) return false;
    const double n = grad_norm();
    if (!(n > max_norm)) return false;
    for (Tensor* t : params_) t->grad *= max_norm / n;
    return true;
  }

  void zero_grad() {
    for (Tensor* t : params_) t->zero_grad();
  }

  void step() {
    ++steps_;
    if (kind_ == OptimizerKind::kSgd) {
      for (Tensor* t : params_) t->value -= lr_ * t->grad;
      return;
    }
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Tensor& t = *params_[i];
      m_[i] = b1 * m_[i] + (1.0 - b1) * t.grad;
      v_[i] = b2 * v_[i] + (1.0 - b2) * t.grad.cwiseAbs2();
      t.value.array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps);
    }
  }

  bool parameters_finite() const {
    for (const Tensor* t : params_)
      if (!t->value.allFinite()) return false;
    return true;
  }

  std::vector<Eigen::MatrixXd> snapshot() const {
    std::vector<Eigen::MatrixXd> s;
    for (const Tensor* t : params_) s.push_back(t->value);
    return s;
  }
  void restore(const std::vector<Eigen::MatrixXd>& s) {
    for (std::size_t i = 0; i < params_.size(); ++i) params_[i]->value = s[i];
  }

 private:
  std::vector<Tensor*> params_;
  OptimizerKind kind_;
  double lr_;
  long steps_{0};
  std::vector<Eigen::MatrixXd> m_, v_;
};

template <class Model>
std::vector<Tensor*> collect_parameters(Model& model) {
  std::vector<Tensor*> out;
  model.for_each_parameter([&](const auto&, Tensor& t) { out.push_back(&t); });
  return out;
}

}  // namespace swarm::ppo
