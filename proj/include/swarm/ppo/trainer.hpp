#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "swarm/ppo/advantage.hpp"
#include "swarm/ppo/buffer.hpp"
#include "swarm/ppo/config.hpp"
#include "swarm/ppo/loss.hpp"
#include "swarm/ppo/optimizer.hpp"

namespace swarm::ppo {

struct UpdateStats {
  double surrogate{0.0};    // mean clipped surrogate, last epoch
  double regularizer{0.0};  // mean matrix-regularizer contribution, last epoch
  double critic_loss{0.0};  // mean 0.5 (V - V_t)^2, last epoch
  double clip_fraction{0.0};
  int dropped{0};        // samples with a non-finite ratio
  int grad_clips{0};     // minibatch steps whose gradient norm was rescaled
  int nan_restores{0};   // steps undone because a parameter went non-finite
  int steps{0};
};

// Actor requirements: Input, Cache, Matrix5 forward(const Input&, Cache&) const,
// backward(const Cache&, const Matrix5& dP) accumulating dL/dparams, for_each_parameter.
// Critic requirements: Cache, double forward(const VectorXd&, Cache&) const,
// backward(const Cache&, double dV), for_each_parameter.
template <class Actor, class Critic>
class Trainer {
 public:
  using Sample = Transition<typename Actor::Input>;

  Trainer(Actor& actor, Critic& critic, const PpoConfig& cfg)
      : actor_(actor),
        critic_(critic),
        cfg_(cfg),
        actor_opt_(collect_parameters(actor), cfg.optimizer, cfg.actor_lr),
        critic_opt_(collect_parameters(critic), cfg.optimizer, cfg.critic_lr) {
    cfg_.validate();
  }

  const PpoConfig& config() const { return cfg_; }
  Optimizer& actor_optimizer() { return actor_opt_; }
  Optimizer& critic_optimizer() { return critic_opt_; }

  template <class Rng>
  UpdateStats update(const std::vector<Sample>& buffer, Rng& rng) {
    UpdateStats st;
    if (buffer.empty()) return st;
    std::vector<double> adv = advantage(buffer, cfg_);
    std::vector<double> target(buffer.size());
    for (std::size_t k = 0; k < buffer.size(); ++k) {
      const auto& t = buffer[k];
      target[k] = critic_target(t.reward, t.next_value, t.delta_p, t.done, cfg_);
    }

    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < buffer.size(); ++k) {
      const double p = buffer[k].prob_old;
      if (std::isfinite(p) && p > 0.0) idx.push_back(k);
      else ++st.dropped;
    }
    if (idx.empty()) return st;
    if (cfg_.normalize_advantages) {
      std::vector<double> kept;
      for (std::size_t k : idx) kept.push_back(adv[k]);
      normalize_in_place(kept);
      for (std::size_t i = 0; i < idx.size(); ++i) adv[idx[i]] = kept[i];
    }

    const std::size_t batch = (cfg_.minibatch_size <= 0 || static_cast<std::size_t>(cfg_.minibatch_size) >= idx.size())
                                  ? idx.size()
                                  : static_cast<std::size_t>(cfg_.minibatch_size);
    typename Actor::Cache ak;
    typename Critic::Cache ck;
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      if (batch < idx.size()) std::shuffle(idx.begin(), idx.end(), rng);
      double surrogate = 0.0, reg_sum = 0.0, closs = 0.0;
      int clipped = 0;
      for (std::size_t start = 0; start < idx.size(); start += batch) {
        const std::size_t end = std::min(idx.size(), start + batch);
        const double inv = 1.0 / static_cast<double>(end - start);
        actor_opt_.zero_grad();
        critic_opt_.zero_grad();
        for (std::size_t i = start; i < end; ++i) {
          const Sample& t = buffer[idx[i]];
          const pfsm::Matrix5 p = actor_.forward(t.input, ak);
          const SurrogateTerm s = clipped_surrogate(p(t.state, t.next_state), t.prob_old, adv[idx[i]],
                                                    cfg_.clip_epsilon);
          surrogate += s.value;
          clipped += s.clipped ? 1 : 0;
          pfsm::Matrix5 dp = pfsm::Matrix5::Zero();
          if (cfg_.l1_weight > 0.0 || cfg_.frobenius_weight > 0.0) {
            const MatrixRegularizer r = matrix_regularizer(p, t.p_old, cfg_);
            reg_sum += r.value;
            dp -= r.grad;
          }
          dp(t.state, t.next_state) -= s.dprob;
          dp *= inv;
          actor_.backward(ak, dp);

          const double v = critic_.forward(t.critic_input, ck);
          const double err = v - target[idx[i]];
          closs += 0.5 * err * err;
          critic_.backward(ck, err * inv);
        }
        step(actor_opt_, st);
        step(critic_opt_, st);
        ++st.steps;
      }
      const double n = static_cast<double>(idx.size());
      st.surrogate = surrogate / n;
      st.regularizer = reg_sum / n;
      st.critic_loss = closs / n;
      st.clip_fraction = clipped / n;
    }
    return st;
  }

 private:
  void step(Optimizer& opt, UpdateStats& st) {
    if (opt.clip_grad_norm(cfg_.max_grad_norm)) ++st.grad_clips;
    const auto snap = opt.snapshot();
    opt.step();
    if (!opt.parameters_finite()) {
      opt.restore(snap);
      opt.set_learning_rate(0.5 * opt.learning_rate());
      ++st.nan_restores;
    }
  }

  Actor& actor_;
  Critic& critic_;
  PpoConfig cfg_;
  Optimizer actor_opt_;
  Optimizer critic_opt_;
};

}  // namespace swarm::ppo
