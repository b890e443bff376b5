#include "pcn/model.hpp"

#include <cmath>
#include <sstream>

namespace pcn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Identity:
      return "identity";
    case Activation::Tanh:
      return "tanh";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "tanh") return Activation::Tanh;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer applied twice
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(seed ^ mix(index));
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw NonFiniteError(std::string(what) + " contains non-finite values");
  }
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << what << ": expected " << rows << "x" << cols << ", got " << m.rows()
       << "x" << m.cols();
    throw ShapeError(os.str());
  }
}

namespace {

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

}  // namespace

ModelParams::ModelParams(Dims dims, Activation activation)
    : dims_(dims),
      activation_(activation),
      theta1_(Matrix::Zero(idx(dims.input), idx(dims.hidden))),
      theta2_(Matrix::Zero(idx(dims.hidden), idx(dims.top))) {}

ModelParams::ModelParams(Matrix theta1, Matrix theta2, Activation activation)
    : dims_{static_cast<std::size_t>(theta1.rows()),
            static_cast<std::size_t>(theta1.cols()),
            static_cast<std::size_t>(theta2.cols())},
      activation_(activation) {
  if (theta2.rows() != theta1.cols()) {
    throw ShapeError("theta2 rows must equal theta1 columns");
  }
  require_finite(theta1, "theta1");
  require_finite(theta2, "theta2");
  theta1_ = std::move(theta1);
  theta2_ = std::move(theta2);
}

void ModelParams::set_theta1(Matrix value) {
  require_shape(value, theta1_.rows(), theta1_.cols(), "theta1");
  require_finite(value, "theta1");
  theta1_ = std::move(value);
}

void ModelParams::set_theta2(Matrix value) {
  require_shape(value, theta2_.rows(), theta2_.cols(), "theta2");
  require_finite(value, "theta2");
  theta2_ = std::move(value);
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  return a.dims_ == b.dims_ && a.activation_ == b.activation_ &&
         a.theta1_ == b.theta1_ && a.theta2_ == b.theta2_;
}

ModelParams init_params(Dims dims, Activation activation, std::uint64_t seed) {
  Rng rng(seed);
  auto uniform = [&rng](Eigen::Index rows, Eigen::Index cols) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
  };
  Matrix t1 = uniform(idx(dims.input), idx(dims.hidden));
  Matrix t2 = uniform(idx(dims.hidden), idx(dims.top));
  return ModelParams(std::move(t1), std::move(t2), activation);
}

namespace {

void fill_row(Matrix& m, Eigen::Index row, Rng& rng, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index j = 0; j < m.cols(); ++j) m(row, j) = scale * normal(rng);
}

}  // namespace

LatentState init_latents(const Dims& dims, Eigen::Index batch, Rng& rng,
                         double scale) {
  LatentState s{Matrix(batch, idx(dims.hidden)), Matrix(batch, idx(dims.top)),
                std::nullopt};
  for (Eigen::Index k = 0; k < batch; ++k) {
    fill_row(s.phi2, k, rng, scale);
    fill_row(s.phi3, k, rng, scale);
  }
  return s;
}

LatentState init_latents_indexed(const Dims& dims, Eigen::Index batch,
                                 std::uint64_t seed, std::uint64_t first_index,
                                 double scale) {
  LatentState s{Matrix(batch, idx(dims.hidden)), Matrix(batch, idx(dims.top)),
                std::nullopt};
  for (Eigen::Index k = 0; k < batch; ++k) {
    Rng rng(mix_seed(seed, first_index + static_cast<std::uint64_t>(k)));
    fill_row(s.phi2, k, rng, scale);
    fill_row(s.phi3, k, rng, scale);
  }
  return s;
}

ActivationResult activation_eval(Activation kind, const Matrix& x) {
  require_finite(x, "activation input");
  switch (kind) {
    case Activation::Identity:
      return {x, Matrix::Ones(x.rows(), x.cols())};
    case Activation::Tanh: {
      Matrix v = x.array().tanh().matrix();
      Matrix d = (1.0 - v.array().square()).matrix();
      return {std::move(v), std::move(d)};
    }
  }
  throw std::invalid_argument("unknown activation");
}

namespace {

void check_state(const ModelParams& params, const LatentState& state) {
  const auto& d = params.dims();
  const Eigen::Index n = state.batch();
  require_shape(state.phi2, n, idx(d.hidden), "phi2");
  require_shape(state.phi3, n, idx(d.top), "phi3");
  if (state.phi1) require_shape(*state.phi1, n, idx(d.input), "phi1");
}

double half_sq_mean(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  return 0.5 * m.squaredNorm() / static_cast<double>(m.rows());
}

}  // namespace

ErrorState compute_errors(const ModelParams& params, const LatentState& state,
                          const Matrix& input, PrecisionGate gate) {
  check_state(params, state);
  const auto& d = params.dims();
  const Matrix& observed = state.phi1 ? *state.phi1 : input;
  require_shape(observed, state.batch(), idx(d.input), "input");

  ErrorState e;
  if (gate.input_open) {
    e.xi1 = observed - state.phi2 * params.theta1().transpose();
  } else {
    e.xi1 = Matrix::Zero(state.batch(), idx(d.input));
  }
  auto act = activation_eval(params.activation(),
                             state.phi3 * params.theta2().transpose());
  e.xi2 = state.phi2 - act.value;
  e.xi3 = state.phi3;
  e.act_deriv = std::move(act.derivative);
  e.energies = {half_sq_mean(e.xi1), half_sq_mean(e.xi2), half_sq_mean(e.xi3)};
  return e;
}

FreeEnergy free_energy(const ErrorState& errors) {
  require_finite(errors.xi1, "xi1");
  require_finite(errors.xi2, "xi2");
  require_finite(errors.xi3, "xi3");
  FreeEnergy f;
  f.per_example = 0.5 * (errors.xi1.rowwise().squaredNorm() +
                         errors.xi2.rowwise().squaredNorm() +
                         errors.xi3.rowwise().squaredNorm());
  f.batch_mean = f.per_example.size() == 0 ? 0.0 : f.per_example.mean();
  return f;
}

namespace {

void check_errors(const LatentState& state, const ErrorState& errors) {
  const Eigen::Index n = state.batch();
  if (errors.xi1.rows() != n || errors.xi2.rows() != n ||
      errors.xi3.rows() != n || errors.act_deriv.rows() != n) {
    throw ShapeError("error state batch does not match latent state");
  }
  require_shape(errors.xi2, n, state.phi2.cols(), "xi2");
  require_shape(errors.act_deriv, n, state.phi2.cols(), "f'(theta2 phi3)");
  require_shape(errors.xi3, n, state.phi3.cols(), "xi3");
}

}  // namespace

LatentGradients inference_gradients(const ModelParams& params,
                                    const LatentState& state,
                                    const ErrorState& errors,
                                    const ClampMask& clamp) {
  check_state(params, state);
  check_errors(state, errors);
  require_shape(errors.xi1, state.batch(), idx(params.dims().input), "xi1");

  LatentGradients g;
  g.d_phi2 = errors.xi2 - errors.xi1 * params.theta1();
  const Matrix scaled = errors.xi2.cwiseProduct(errors.act_deriv);
  g.d_phi3 = errors.xi3 - scaled * params.theta2();
  if (state.phi1) {
    if (clamp.phi1) {
      if (clamp.phi1->cols() != errors.xi1.cols()) {
        throw ShapeError("phi1 clamp mask length does not match input width");
      }
      g.d_phi1 = clamp.phi1->replicate(errors.xi1.rows(), 1)
                     .select(Matrix::Zero(errors.xi1.rows(), errors.xi1.cols()),
                             errors.xi1);
    } else {
      g.d_phi1 = errors.xi1;
    }
  }
  return g;
}

WeightGradients learning_gradients(const ModelParams& params,
                                   const LatentState& state,
                                   const ErrorState& errors) {
  check_state(params, state);
  check_errors(state, errors);
  require_shape(errors.xi1, state.batch(), idx(params.dims().input), "xi1");

  const double n = static_cast<double>(std::max<Eigen::Index>(state.batch(), 1));
  WeightGradients g;
  g.d_theta1 = -(errors.xi1.transpose() * state.phi2) / n;
  g.d_theta2 =
      -(errors.xi2.cwiseProduct(errors.act_deriv).transpose() * state.phi3) / n;
  return g;
}

LatentState inference_step(const ModelParams& params, const LatentState& state,
                           const Matrix& input, PrecisionGate gate,
                           double alpha, const ClampMask& clamp) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("inference rate must be finite and >= 0");
  }
  const ErrorState errors = compute_errors(params, state, input, gate);
  const LatentGradients g = inference_gradients(params, state, errors, clamp);

  LatentState next = state;
  if (!clamp.phi2) next.phi2 -= alpha * g.d_phi2;
  if (!clamp.phi3) next.phi3 -= alpha * g.d_phi3;
  if (next.phi1) {
    Matrix stepped = *state.phi1 - alpha * *g.d_phi1;
    if (clamp.phi1) {
      // keep clamped coordinates bit-identical
      next.phi1 = clamp.phi1->replicate(stepped.rows(), 1)
                      .select(*state.phi1, stepped);
    } else {
      next.phi1 = std::move(stepped);
    }
  }
  require_finite(next.phi2, "phi2");
  require_finite(next.phi3, "phi3");
  if (next.phi1) require_finite(*next.phi1, "phi1");
  return next;
}

}  // namespace pcn
