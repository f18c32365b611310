#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "swarm/core/error.hpp"
#include "swarm/pfsm/state.hpp"

namespace swarm::pfsm {

using Matrix5 = Eigen::Matrix<double, 5, 5, Eigen::RowMajor>;
using Vector5 = Eigen::Matrix<double, 5, 1>;

// Permitted edges of the state graph; mask(s, s') == true when s -> s' may fire.
class TopologyMask {
 public:
  TopologyMask() { allowed_.fill(true); }

  static TopologyMask fully_connected() { return {}; }

  bool allowed(StateId from, StateId to) const { return allowed_[index(from) * kNumStates + index(to)]; }
  void set(StateId from, StateId to, bool ok) { allowed_[index(from) * kNumStates + index(to)] = ok; }

  bool row_has_edge(StateId from) const {
    for (StateId to : kAllStates)
      if (allowed(from, to)) return true;
    return false;
  }

  void validate() const {
    for (StateId s : kAllStates)
      require(row_has_edge(s), ErrorCode::kInvalidConfig,
              "state " + std::string(name(s)) + " has no permitted outgoing edge");
  }

  bool operator==(const TopologyMask&) const = default;

 private:
  std::array<bool, kNumStates * kNumStates> allowed_{};
};

// Row-stochastic 5x5 matrix, rows indexed by the current state.
class TransitionMatrix {
 public:
  TransitionMatrix() : p_(Matrix5::Constant(1.0 / kNumStates)) {}
  explicit TransitionMatrix(const Matrix5& p) : p_(p) {}

  static TransitionMatrix identity() { return TransitionMatrix(Matrix5::Identity()); }

  double operator()(StateId from, StateId to) const {
    return p_(static_cast<Eigen::Index>(index(from)), static_cast<Eigen::Index>(index(to)));
  }
  Vector5 row(StateId from) const { return p_.row(static_cast<Eigen::Index>(index(from))).transpose(); }
  const Matrix5& matrix() const { return p_; }
  Matrix5& matrix() { return p_; }

  // Entries in [0, 1], rows sum to 1 within tol, and masked edges exactly zero.
  bool is_valid(const TopologyMask& mask, double tol = 1e-6) const {
    for (StateId s : kAllStates) {
      double sum = 0.0;
      for (StateId t : kAllStates) {
        const double v = (*this)(s, t);
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) return false;
        if (!mask.allowed(s, t) && v != 0.0) return false;
        sum += v;
      }
      if (std::abs(sum - 1.0) > tol) return false;
    }
    return true;
  }

 private:
  Matrix5 p_;
};

// Argmax over the current row, lowest index on ties. A row with no positive mass cannot
// transition anywhere and is reported as a structural deadlock.
inline StateId next_state(StateId current, const TransitionMatrix& p) {
  std::size_t best = 0;
  double best_value = -1.0;
  for (std::size_t j = 0; j < kNumStates; ++j) {
    const double v = p(current, state_from_index(j));
    if (v > best_value) {
      best_value = v;
      best = j;
    }
  }
  require(best_value > 0.0, ErrorCode::kStructuralDeadlock,
          "transition row for " + std::string(name(current)) + " has no probability mass");
  return state_from_index(best);
}

struct PfsmSpec {
  std::array<double, kNumStates> initial_distribution{1.0, 0.0, 0.0, 0.0, 0.0};
  TopologyMask mask;

  void validate() const {
    double sum = 0.0;
    for (double v : initial_distribution) {
      require(std::isfinite(v) && v >= 0.0, ErrorCode::kInvalidConfig,
              "initial distribution entries must be non-negative");
      sum += v;
    }
    require(std::abs(sum - 1.0) <= 1e-9, ErrorCode::kInvalidConfig,
            "initial distribution must sum to 1");
    mask.validate();
  }
};

// Inverse-CDF draw from the initial distribution.
template <class Rng>
StateId initial_state(const PfsmSpec& spec, Rng& rng) {
  spec.validate();
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < kNumStates; ++i) {
    if (spec.initial_distribution[i] <= 0.0) continue;
    last_positive = i;
    acc += spec.initial_distribution[i];
    if (u < acc) return state_from_index(i);
  }
  return state_from_index(last_positive);
}

// The state a machine actually enters: `desired` when the edge is permitted, otherwise it holds
// the current state, or takes the lowest permitted edge when even the self-loop is masked.
inline StateId constrain_to_mask(StateId current, StateId desired, const TopologyMask& mask) {
  if (mask.allowed(current, desired)) return desired;
  if (mask.allowed(current, current)) return current;
  for (StateId s : kAllStates)
    if (mask.allowed(current, s)) return s;
  fail(ErrorCode::kInvalidConfig, "state has no permitted outgoing edge");
}

}  // namespace swarm::pfsm
