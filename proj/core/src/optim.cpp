#include "pcn/optim.hpp"

#include <cmath>

namespace pcn {

Matrix sgd_step(const Matrix& param, const Matrix& grad, SgdConfig config) {
  require_shape(grad, param.rows(), param.cols(), "sgd gradient");
  return param - config.rate * grad;
}

AdamState AdamState::zeros(Eigen::Index rows, Eigen::Index cols,
                           AdamConfig config) {
  return {Matrix::Zero(rows, cols), Matrix::Zero(rows, cols), 0, config};
}

std::pair<Matrix, AdamState> adam_step(const Matrix& param, const Matrix& grad,
                                       AdamState state) {
  require_shape(grad, param.rows(), param.cols(), "adam gradient");
  require_shape(state.m, param.rows(), param.cols(), "adam first moment");
  require_shape(state.v, param.rows(), param.cols(), "adam second moment");

  const auto& c = state.config;
  state.t += 1;
  state.m = c.decay1 * state.m + (1.0 - c.decay1) * grad;
  state.v = c.decay2 * state.v + (1.0 - c.decay2) * grad.cwiseAbs2();

  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(c.decay1, t);
  const double correction2 = 1.0 - std::pow(c.decay2, t);

  Matrix step = (state.m.array() / correction1) /
                ((state.v.array() / correction2).sqrt() + c.epsilon);
  Matrix updated = param - c.rate * step;
  return {std::move(updated), std::move(state)};
}

}  // namespace pcn
