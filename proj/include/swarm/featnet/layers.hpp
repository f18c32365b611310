#pragma once

#include <Eigen/Core>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace swarm::featnet {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// A learnable array and its accumulated gradient.
struct Tensor {
  MatrixXd value;
  MatrixXd grad;

  Tensor() = default;
  Tensor(Eigen::Index rows, Eigen::Index cols)
      : value(MatrixXd::Zero(rows, cols)), grad(MatrixXd::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

// Uniform Glorot initialisation.
template <class Rng>
void glorot_init(Tensor& t, Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index i = 0; i < t.value.size(); ++i) t.value.data()[i] = dist(rng);
}

inline VectorXd tanh_forward(const VectorXd& a) { return a.array().tanh().matrix(); }

// dL/da given dL/dy and y = tanh(a).
inline VectorXd tanh_backward(const VectorXd& y, const VectorXd& dy) {
  return (dy.array() * (1.0 - y.array().square())).matrix();
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y = W x + b.
struct Linear {
  Tensor weight;
  Tensor bias;

  Linear() = default;
  Linear(int in, int out) : weight(out, in), bias(out, 1) {}

  template <class Rng>
  void init(Rng& rng) {
    glorot_init(weight, weight.value.cols(), weight.value.rows(), rng);
    bias.value.setZero();
  }

  int in_features() const { return static_cast<int>(weight.value.cols()); }
  int out_features() const { return static_cast<int>(weight.value.rows()); }

  VectorXd forward(const VectorXd& x) const { return weight.value * x + bias.value.col(0); }

  // Accumulates parameter gradients and returns dL/dx.
  VectorXd backward(const VectorXd& x, const VectorXd& dy) {
    weight.grad.noalias() += dy * x.transpose();
    bias.grad.col(0) += dy;
    return weight.value.transpose() * dy;
  }

  // Parameter gradients only.
  void backward_params(const VectorXd& x, const VectorXd& dy) {
    weight.grad.noalias() += dy * x.transpose();
    bias.grad.col(0) += dy;
  }
};

// 1-D convolution along time with zero "same" padding. Input is channels x time.
struct Conv1d {
  Tensor weight;  // out x (in * kernel), column index = k * in + c
  Tensor bias;    // out x 1
  int in_channels{0};
  int kernel{3};

  Conv1d() = default;
  Conv1d(int in, int out, int k) : weight(out, in * k), bias(out, 1), in_channels(in), kernel(k) {}

  template <class Rng>
  void init(Rng& rng) {
    glorot_init(weight, weight.value.cols(), weight.value.rows() * kernel, rng);
    bias.value.setZero();
  }

  MatrixXd im2col(const MatrixXd& x) const {
    const Eigen::Index T = x.cols();
    const int pad = (kernel - 1) / 2;
    MatrixXd col = MatrixXd::Zero(in_channels * kernel, T);
    for (Eigen::Index t = 0; t < T; ++t)
      for (int k = 0; k < kernel; ++k) {
        const Eigen::Index src = t + k - pad;
        if (src < 0 || src >= T) continue;
        col.block(k * in_channels, t, in_channels, 1) = x.col(src);
      }
    return col;
  }

  MatrixXd forward_col(const MatrixXd& col) const {
    MatrixXd y = weight.value * col;
    y.colwise() += bias.value.col(0);
    return y;
  }

  void backward_params(const MatrixXd& col, const MatrixXd& dy) {
    weight.grad.noalias() += dy * col.transpose();
    bias.grad.col(0) += dy.rowwise().sum();
  }
};

// Non-overlapping max pooling along time; remembers the winning column for backprop.
struct MaxPoolResult {
  MatrixXd out;
  Eigen::MatrixXi argmax;
};

inline MaxPoolResult max_pool_time(const MatrixXd& x, int window) {
  const Eigen::Index C = x.rows();
  const Eigen::Index Tout = x.cols() / window;
  MaxPoolResult r{MatrixXd(C, Tout), Eigen::MatrixXi(C, Tout)};
  for (Eigen::Index t = 0; t < Tout; ++t)
    for (Eigen::Index c = 0; c < C; ++c) {
      Eigen::Index best = t * window;
      for (Eigen::Index k = 1; k < window; ++k)
        if (x(c, t * window + k) > x(c, best)) best = t * window + k;
      r.out(c, t) = x(c, best);
      r.argmax(c, t) = static_cast<int>(best);
    }
  return r;
}

inline MatrixXd max_pool_backward(const MaxPoolResult& fwd, const MatrixXd& dout, Eigen::Index T) {
  MatrixXd dx = MatrixXd::Zero(dout.rows(), T);
  for (Eigen::Index t = 0; t < dout.cols(); ++t)
    for (Eigen::Index c = 0; c < dout.rows(); ++c) dx(c, fwd.argmax(c, t)) += dout(c, t);
  return dx;
}

// Single LSTM step. Gate order in the stacked weight: input, forget, cell, output.
struct LstmCell {
  Tensor weight;  // 4H x (in + H)
  Tensor bias;    // 4H x 1
  int hidden{0};

  struct Cache {
    VectorXd xh;  // [x; h_prev]
    VectorXd c_prev;
    VectorXd i, f, g, o;
    VectorXd c, tanh_c, h;
  };

  LstmCell() = default;
  LstmCell(int in, int h) : weight(4 * h, in + h), bias(4 * h, 1), hidden(h) {}

  template <class Rng>
  void init(Rng& rng) {
    glorot_init(weight, weight.value.cols(), hidden, rng);
    bias.value.setZero();
    bias.value.block(hidden, 0, hidden, 1).setOnes();  // forget gate starts open
  }

  Cache forward(const VectorXd& x, const VectorXd& h_prev, const VectorXd& c_prev) const {
    const int H = hidden;
    Cache k;
    k.xh.resize(x.size() + H);
    k.xh << x, h_prev;
    k.c_prev = c_prev;
    const VectorXd z = weight.value * k.xh + bias.value.col(0);
    k.i = z.segment(0, H).unaryExpr([](double v) { return sigmoid(v); });
    k.f = z.segment(H, H).unaryExpr([](double v) { return sigmoid(v); });
    k.g = z.segment(2 * H, H).array().tanh().matrix();
    k.o = z.segment(3 * H, H).unaryExpr([](double v) { return sigmoid(v); });
    k.c = (k.f.array() * c_prev.array() + k.i.array() * k.g.array()).matrix();
    k.tanh_c = k.c.array().tanh().matrix();
    k.h = (k.o.array() * k.tanh_c.array()).matrix();
    return k;
  }

  // Backprop one step given dL/dh and dL/dc of this step's outputs. The previous state is
  // treated as a constant input. Returns dL/dx.
  VectorXd backward(const Cache& k, const VectorXd& dh, const VectorXd& dc_next) {
    const int H = hidden;
    const VectorXd dc = dc_next + (dh.array() * k.o.array() * (1.0 - k.tanh_c.array().square())).matrix();
    VectorXd dz(4 * H);
    dz.segment(0, H) = (dc.array() * k.g.array() * k.i.array() * (1.0 - k.i.array())).matrix();
    dz.segment(H, H) = (dc.array() * k.c_prev.array() * k.f.array() * (1.0 - k.f.array())).matrix();
    dz.segment(2 * H, H) = (dc.array() * k.i.array() * (1.0 - k.g.array().square())).matrix();
    dz.segment(3 * H, H) = (dh.array() * k.tanh_c.array() * k.o.array() * (1.0 - k.o.array())).matrix();
    weight.grad.noalias() += dz * k.xh.transpose();
    bias.grad.col(0) += dz;
    const VectorXd dxh = weight.value.transpose() * dz;
    return dxh.head(k.xh.size() - H);
  }
};

}  // namespace swarm::featnet
