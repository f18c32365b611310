#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "swarm/ppo/config.hpp"

namespace swarm::ppo {

struct SurrogateTerm {
  double value{0.0};
  // d value / d pi_theta(s_{t+1} | s_t)
  double dprob{0.0};
  bool clipped{false};
};

// min(rho A, clip(rho, 1 - eps, 1 + eps) A) with rho = prob / prob_old.
inline SurrogateTerm clipped_surrogate(double prob, double prob_old, double adv, double eps) {
  const double rho = prob / prob_old;
  const double unclipped = rho * adv;
  const double clipped = std::clamp(rho, 1.0 - eps, 1.0 + eps) * adv;
  SurrogateTerm s;
  if (unclipped <= clipped) {
    s.value = unclipped;
    s.dprob = adv / prob_old;
  } else {
    s.value = clipped;
    s.clipped = true;
  }
  return s;
}

struct MatrixRegularizer {
  double value{0.0};
  Eigen::MatrixXd grad;  // d value / dP
};

// Contribution of the matrix terms to the maximised objective:
//   sign * (lambda_1 |P|_1 + lambda_2 |P - P_prev|_F^2)
// with sign = -1 (penalties) unless the literal signs are requested.
inline MatrixRegularizer matrix_regularizer(const Eigen::MatrixXd& p, const Eigen::MatrixXd& p_prev,
                                            const PpoConfig& cfg) {
  const double sign = cfg.literal_signs ? 1.0 : -1.0;
  const Eigen::MatrixXd diff = p - p_prev;
  MatrixRegularizer r;
  r.value = sign * (cfg.l1_weight * p.cwiseAbs().sum() + cfg.frobenius_weight * diff.squaredNorm());
  r.grad = sign * (cfg.l1_weight * p.unaryExpr([](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }) +
                   2.0 * cfg.frobenius_weight * diff);
  return r;
}

}  // namespace swarm::ppo
