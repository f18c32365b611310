#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "swarm/core/error.hpp"
#include "swarm/featnet/features.hpp"
#include "swarm/featnet/layers.hpp"
#include "swarm/pfsm/transition.hpp"

namespace swarm::featnet {

using pfsm::Matrix5;
using pfsm::TopologyMask;
using pfsm::TransitionMatrix;

struct NetworkConfig {
  FeatureConfig features;
  int conv_channels{32};
  int kernel{3};
  int pool{2};
  int embed{64};       // width of e^t and of the recurrent state
  int stream_out{64};  // width of r_a, r_t, r_e
  int hidden{512};     // fusion trunk width
  double temperature{1.0};
  bool learn_temperature{false};
  std::uint64_t init_seed{1};

  void validate() const {
    require(features.window >= pool && features.window % pool == 0, ErrorCode::kInvalidConfig,
            "window must be a positive multiple of the pooling size");
    require(kernel >= 1 && kernel % 2 == 1, ErrorCode::kInvalidConfig, "kernel must be odd");
    require(conv_channels > 0 && embed > 0 && stream_out > 0 && hidden > 0,
            ErrorCode::kInvalidConfig, "layer widths must be positive");
    require(temperature > 0.0, ErrorCode::kInvalidConfig, "attention temperature must be > 0");
    require(features.max_teammates >= 0 && features.max_enemies >= 0, ErrorCode::kInvalidConfig,
            "entity caps must be non-negative");
  }

  int fused_width() const { return 3 * stream_out; }
};

// alpha_j = exp(-d_j / tau) / sum_k exp(-d_k / tau). Empty input gives an empty result.
inline VectorXd attention_weights(std::span<const double> distances, double tau) {
  require(tau > 0.0, ErrorCode::kInvalidConfig, "temperature must be positive");
  VectorXd a(static_cast<Eigen::Index>(distances.size()));
  if (distances.empty()) return a;
  double lo = distances[0];
  for (double d : distances) lo = std::min(lo, d);
  for (std::size_t j = 0; j < distances.size(); ++j)
    a(static_cast<Eigen::Index>(j)) = std::exp(-(distances[j] - lo) / tau);
  return a / a.sum();
}

// e_i = sum_j alpha_j * u_j.
inline VectorXd teammate_aggregate(std::span<const VectorXd> embeddings, const VectorXd& alpha) {
  require(static_cast<Eigen::Index>(embeddings.size()) == alpha.size(), ErrorCode::kInvalidConfig,
          "one attention weight per teammate embedding");
  require(!embeddings.empty(), ErrorCode::kInvalidConfig, "no teammate embeddings");
  VectorXd e = VectorXd::Zero(embeddings.front().size());
  for (std::size_t j = 0; j < embeddings.size(); ++j) e += alpha(static_cast<Eigen::Index>(j)) * embeddings[j];
  return e;
}

// Row-wise softmax with forbidden edges pinned to exactly zero.
inline TransitionMatrix masked_row_softmax(const Matrix5& logits, const TopologyMask& mask) {
  Matrix5 p = Matrix5::Zero();
  for (int r = 0; r < 5; ++r) {
    const auto from = pfsm::state_from_index(static_cast<std::size_t>(r));
    double hi = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < 5; ++c)
      if (mask.allowed(from, pfsm::state_from_index(static_cast<std::size_t>(c)))) hi = std::max(hi, logits(r, c));
    require(std::isfinite(hi), ErrorCode::kInvalidConfig, "transition row has every edge masked");
    double sum = 0.0;
    for (int c = 0; c < 5; ++c)
      if (mask.allowed(from, pfsm::state_from_index(static_cast<std::size_t>(c)))) {
        p(r, c) = std::exp(logits(r, c) - hi);
        sum += p(r, c);
      }
    p.row(r) /= sum;
  }
  return TransitionMatrix(p);
}

// dL/dlogits of the masked softmax; masked entries receive no gradient.
inline Matrix5 masked_row_softmax_backward(const Matrix5& p, const Matrix5& dp) {
  Matrix5 dl = Matrix5::Zero();
  for (int r = 0; r < 5; ++r) {
    const double inner = p.row(r).dot(dp.row(r));
    for (int c = 0; c < 5; ++c) dl(r, c) = p(r, c) * (dp(r, c) - inner);
  }
  return dl;
}

// E1: convolution over time, tanh, max-pool, then a fully connected layer with tanh.
struct Encoder {
  Conv1d conv;
  Linear fc;
  int window{8};
  int pool{2};

  struct Cache {
    MatrixXd col;
    MatrixXd act;
    MaxPoolResult pooled;
    VectorXd flat;
    VectorXd out;
  };

  Encoder() = default;
  Encoder(const NetworkConfig& cfg)
      : conv(kChannels, cfg.conv_channels, cfg.kernel),
        fc(cfg.conv_channels * (cfg.features.window / cfg.pool), cfg.embed),
        window(cfg.features.window),
        pool(cfg.pool) {}

  template <class Rng>
  void init(Rng& rng) {
    conv.init(rng);
    fc.init(rng);
  }

  Cache forward(const MatrixXd& x) const {
    Cache k;
    k.col = conv.im2col(x);
    k.act = conv.forward_col(k.col).array().tanh().matrix();
    k.pooled = max_pool_time(k.act, pool);
    k.flat = Eigen::Map<const VectorXd>(k.pooled.out.data(), k.pooled.out.size());
    k.out = tanh_forward(fc.forward(k.flat));
    return k;
  }

  void backward(const Cache& k, const VectorXd& dout) {
    const VectorXd dfc = tanh_backward(k.out, dout);
    const VectorXd dflat = fc.backward(k.flat, dfc);
    const MatrixXd dpooled = Eigen::Map<const MatrixXd>(dflat.data(), k.pooled.out.rows(), k.pooled.out.cols());
    const MatrixXd dact = max_pool_backward(k.pooled, dpooled, k.act.cols());
    const MatrixXd dpre = (dact.array() * (1.0 - k.act.array().square())).matrix();
    conv.backward_params(k.col, dpre);
  }
};

// Recurrent state carried across ticks for the agent and enemy streams.
struct StreamState {
  VectorXd agent_h, agent_c, enemy_h, enemy_c;

  static StreamState zeros(int width) {
    return {VectorXd::Zero(width), VectorXd::Zero(width), VectorXd::Zero(width), VectorXd::Zero(width)};
  }
};

// Three-stream network (agent, teammate, enemy) fused into a transition matrix.
class CompoundNetwork {
 public:
  struct Cache {
    Encoder::Cache self_enc;
    LstmCell::Cache agent_lstm;
    VectorXd r_a;

    std::vector<Encoder::Cache> mate_enc;
    std::vector<double> mate_distance;
    VectorXd alpha;
    VectorXd mate_e, mate_mix, r_t;

    std::vector<Encoder::Cache> enemy_enc;
    VectorXd enemy_e;
    LstmCell::Cache enemy_lstm;
    VectorXd r_e;

    VectorXd z;
    VectorXd trunk;
    Matrix5 p;
  };

  struct Output {
    TransitionMatrix p;
    Matrix5 logits;
    VectorXd z;
    StreamState next;
  };

  explicit CompoundNetwork(const NetworkConfig& cfg = {})
      : cfg_(cfg),
        agent_enc_(cfg),
        agent_lstm_(cfg.embed, cfg.embed),
        agent_out_(cfg.embed, cfg.stream_out),
        mate_enc_(cfg),
        mate_mix_(cfg.embed, cfg.embed),
        mate_out_(cfg.embed, cfg.stream_out),
        log_tau_(1, 1),
        enemy_enc_(cfg),
        enemy_lstm_(cfg.embed, cfg.embed),
        enemy_out_(cfg.embed, cfg.stream_out),
        trunk_(cfg.fused_width(), cfg.hidden),
        head_(cfg.hidden, 25) {
    cfg_.validate();
    std::mt19937_64 rng(cfg.init_seed);
    agent_enc_.init(rng);
    agent_lstm_.init(rng);
    agent_out_.init(rng);
    mate_enc_.init(rng);
    mate_mix_.init(rng);
    mate_out_.init(rng);
    enemy_enc_.init(rng);
    enemy_lstm_.init(rng);
    enemy_out_.init(rng);
    trunk_.init(rng);
    head_.init(rng);
    head_.weight.value *= 0.1;
    log_tau_.value(0, 0) = std::log(cfg.temperature);
  }

  const NetworkConfig& config() const { return cfg_; }
  double temperature() const { return std::exp(log_tau_.value(0, 0)); }
  StreamState initial_state() const { return StreamState::zeros(cfg_.embed); }

  // Agent stream alone: r_a for one window, advancing the carried recurrent state.
  VectorXd agent_stream(const MatrixXd& window, StreamState& state) const {
    const auto enc = agent_enc_.forward(window);
    const auto lstm = agent_lstm_.forward(enc.out, state.agent_h, state.agent_c);
    state.agent_h = lstm.h;
    state.agent_c = lstm.c;
    return tanh_forward(agent_out_.forward(lstm.h));
  }

  Output forward(const FeatureFrame& f, const StreamState& state, const TopologyMask& mask,
                 Cache* cache = nullptr) const {
    Cache local;
    Cache& k = cache ? *cache : local;

    k.self_enc = agent_enc_.forward(f.self);
    k.agent_lstm = agent_lstm_.forward(k.self_enc.out, state.agent_h, state.agent_c);
    k.r_a = tanh_forward(agent_out_.forward(k.agent_lstm.h));

    k.mate_enc.clear();
    k.mate_distance.clear();
    std::vector<VectorXd> embeddings;
    for (std::size_t j = 0; j < f.teammates.size(); ++j) {
      if (!f.teammate_valid[j]) continue;
      k.mate_enc.push_back(mate_enc_.forward(f.teammates[j]));
      embeddings.push_back(k.mate_enc.back().out);
      k.mate_distance.push_back(f.teammate_distance[j]);
    }
    if (embeddings.empty()) {
      k.alpha.resize(0);
      k.r_t = VectorXd::Zero(cfg_.stream_out);
    } else {
      k.alpha = attention_weights(k.mate_distance, temperature());
      k.mate_e = teammate_aggregate(embeddings, k.alpha);
      k.mate_mix = tanh_forward(mate_mix_.forward(k.mate_e));
      k.r_t = tanh_forward(mate_out_.forward(k.mate_mix));
    }

    k.enemy_enc.clear();
    k.enemy_e = VectorXd::Zero(cfg_.embed);
    for (std::size_t j = 0; j < f.enemies.size(); ++j) {
      if (!f.enemy_valid[j]) continue;
      k.enemy_enc.push_back(enemy_enc_.forward(f.enemies[j]));
      k.enemy_e += k.enemy_enc.back().out;
    }
    if (!k.enemy_enc.empty()) k.enemy_e /= static_cast<double>(k.enemy_enc.size());
    k.enemy_lstm = enemy_lstm_.forward(k.enemy_e, state.enemy_h, state.enemy_c);
    k.r_e = tanh_forward(enemy_out_.forward(k.enemy_lstm.h));

    k.z.resize(cfg_.fused_width());
    k.z << k.r_a, k.r_t, k.r_e;
    k.trunk = tanh_forward(trunk_.forward(k.z));
    const VectorXd flat = head_.forward(k.trunk);
    Output out;
    out.logits = Eigen::Map<const Matrix5>(flat.data());
    out.p = masked_row_softmax(out.logits, mask);
    out.z = k.z;
    out.next = {k.agent_lstm.h, k.agent_lstm.c, k.enemy_lstm.h, k.enemy_lstm.c};
    k.p = out.p.matrix();
    return out;
  }

  // Accumulates dL/dparameters given dL/dP for a forward pass recorded in `k`.
  void backward(const Cache& k, const Matrix5& dp) {
    const Matrix5 dlogits = masked_row_softmax_backward(k.p, dp);
    const VectorXd dflat = Eigen::Map<const VectorXd>(dlogits.data(), 25);
    const VectorXd dtrunk = tanh_backward(k.trunk, head_.backward(k.trunk, dflat));
    const VectorXd dz = trunk_.backward(k.z, dtrunk);
    const int w = cfg_.stream_out;

    {
      const VectorXd da = tanh_backward(k.r_a, dz.segment(0, w));
      const VectorXd dh = agent_out_.backward(k.agent_lstm.h, da);
      const VectorXd dx = agent_lstm_.backward(k.agent_lstm, dh, VectorXd::Zero(cfg_.embed));
      agent_enc_.backward(k.self_enc, dx);
    }

    if (!k.mate_enc.empty()) {
      const VectorXd dout = tanh_backward(k.r_t, dz.segment(w, w));
      const VectorXd dmix = tanh_backward(k.mate_mix, mate_out_.backward(k.mate_mix, dout));
      const VectorXd de = mate_mix_.backward(k.mate_e, dmix);
      const Eigen::Index m = k.alpha.size();
      VectorXd dalpha(m);
      for (Eigen::Index j = 0; j < m; ++j) {
        dalpha(j) = k.mate_enc[static_cast<std::size_t>(j)].out.dot(de);
        mate_enc_.backward(k.mate_enc[static_cast<std::size_t>(j)], k.alpha(j) * de);
      }
      if (cfg_.learn_temperature) {
        const double inner = k.alpha.dot(dalpha);
        const double tau = temperature();
        double dlog_tau = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
          const double ds = k.alpha(j) * (dalpha(j) - inner);
          dlog_tau += ds * k.mate_distance[static_cast<std::size_t>(j)] / tau;
        }
        log_tau_.grad(0, 0) += dlog_tau;
      }
    }

    {
      const VectorXd da = tanh_backward(k.r_e, dz.segment(2 * w, w));
      const VectorXd dh = enemy_out_.backward(k.enemy_lstm.h, da);
      const VectorXd dx = enemy_lstm_.backward(k.enemy_lstm, dh, VectorXd::Zero(cfg_.embed));
      if (!k.enemy_enc.empty()) {
        const VectorXd du = dx / static_cast<double>(k.enemy_enc.size());
        for (const auto& enc : k.enemy_enc) enemy_enc_.backward(enc, du);
      }
    }
  }

  // Visits every learnable tensor with a stable name. The temperature is visited only when
  // it is learnable.
  template <class F>
  void for_each_parameter(F&& f) {
    visit(*this, f);
  }
  template <class F>
  void for_each_parameter(F&& f) const {
    visit(*this, f);
  }

  void zero_grad() {
    for_each_parameter([](const std::string&, Tensor& t) { t.zero_grad(); });
  }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for_each_parameter([&](const std::string&, const Tensor& t) { n += t.size(); });
    return n;
  }

 private:
  template <class Self, class F>
  static void visit(Self& s, F& f) {
    const auto enc = [&](const std::string& p, auto& e) {
      f(p + ".conv.weight", e.conv.weight);
      f(p + ".conv.bias", e.conv.bias);
      f(p + ".fc.weight", e.fc.weight);
      f(p + ".fc.bias", e.fc.bias);
    };
    const auto lin = [&](const std::string& p, auto& l) {
      f(p + ".weight", l.weight);
      f(p + ".bias", l.bias);
    };
    enc("agent.embed", s.agent_enc_);
    lin("agent.lstm", s.agent_lstm_);
    lin("agent.out", s.agent_out_);
    enc("teammate.embed", s.mate_enc_);
    lin("teammate.mix", s.mate_mix_);
    lin("teammate.out", s.mate_out_);
    if (s.cfg_.learn_temperature) f("teammate.log_tau", s.log_tau_);
    enc("enemy.embed", s.enemy_enc_);
    lin("enemy.lstm", s.enemy_lstm_);
    lin("enemy.out", s.enemy_out_);
    lin("policy.trunk", s.trunk_);
    lin("policy.head", s.head_);
  }

  NetworkConfig cfg_;
  Encoder agent_enc_;
  LstmCell agent_lstm_;
  Linear agent_out_;
  Encoder mate_enc_;
  Linear mate_mix_;
  Linear mate_out_;
  Tensor log_tau_;
  Encoder enemy_enc_;
  LstmCell enemy_lstm_;
  Linear enemy_out_;
  Linear trunk_;
  Linear head_;
};

}  // namespace swarm::featnet
