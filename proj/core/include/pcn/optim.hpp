#pragma once

// First-order optimizers with explicit state. Both consume gradients of the
// objective and step against them.

#include <cstdint>
#include <utility>

#include "pcn/types.hpp"

namespace pcn {

struct SgdConfig {
  double rate = 0.01;
};

// param - rate * grad
Matrix sgd_step(const Matrix& param, const Matrix& grad, SgdConfig config);

struct AdamConfig {
  double rate = 1e-4;
  double decay1 = 0.9;
  double decay2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

struct AdamState {
  Matrix m;  // first moment
  Matrix v;  // second moment, entries >= 0
  std::uint64_t t = 0;
  AdamConfig config;

  static AdamState zeros(Eigen::Index rows, Eigen::Index cols,
                         AdamConfig config);
  static AdamState zeros_like(const Matrix& param, AdamConfig config) {
    return zeros(param.rows(), param.cols(), config);
  }

  friend bool operator==(const AdamState& a, const AdamState& b) {
    return a.t == b.t && a.config == b.config && a.m == b.m && a.v == b.v;
  }
};

// Bias-corrected Adam. Returns the updated parameter and state; t is
// incremented before the correction terms are computed.
std::pair<Matrix, AdamState> adam_step(const Matrix& param, const Matrix& grad,
                                       AdamState state);

}  // namespace pcn
