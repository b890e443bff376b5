#pragma once

// Three-level predictive coding network with identity covariances:
//
//   u   ~ N(theta1 * v2, I)
//   v2  ~ N(f(theta2 * v3), I)
//   v3  ~ N(0, I)
//
// Inference descends the free energy over the latent estimates phi2, phi3
// (and phi1 when the input layer itself is being completed); learning
// descends it over theta1, theta2. Every gradient here is a gradient of the
// free energy, to be minimized.

#include <array>
#include <optional>

#include "pcn/types.hpp"

namespace pcn {

class ModelParams {
 public:
  // Zero weights.
  ModelParams(Dims dims, Activation activation);
  ModelParams(Matrix theta1, Matrix theta2, Activation activation);

  const Dims& dims() const { return dims_; }
  Activation activation() const { return activation_; }
  const Matrix& theta1() const { return theta1_; }  // input x hidden
  const Matrix& theta2() const { return theta2_; }  // hidden x top

  // Shape and finiteness are checked; shapes never change after construction.
  void set_theta1(Matrix value);
  void set_theta2(Matrix value);

  friend bool operator==(const ModelParams& a, const ModelParams& b);

 private:
  Dims dims_;
  Activation activation_;
  Matrix theta1_;
  Matrix theta2_;
};

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], where fan_in is the width of
// the layer doing the predicting.
ModelParams init_params(Dims dims, Activation activation, std::uint64_t seed);

struct LatentState {
  Matrix phi2;                 // batch x hidden
  Matrix phi3;                 // batch x top
  std::optional<Matrix> phi1;  // batch x input, recall only

  Eigen::Index batch() const { return phi2.rows(); }
};

// Per-example latent draws N(0, scale^2). The shared-generator form consumes
// from `rng` row by row; the indexed form gives example `first_index + k`
// its own stream so results do not depend on how examples are batched.
LatentState init_latents(const Dims& dims, Eigen::Index batch, Rng& rng,
                         double scale);
LatentState init_latents_indexed(const Dims& dims, Eigen::Index batch,
                                 std::uint64_t seed, std::uint64_t first_index,
                                 double scale);

struct PrecisionGate {
  bool input_open = true;  // false suppresses xi1 everywhere downstream

  static PrecisionGate open() { return {true}; }
  static PrecisionGate closed() { return {false}; }
};

struct ErrorState {
  Matrix xi1;        // batch x input
  Matrix xi2;        // batch x hidden
  Matrix xi3;        // batch x top, always equal to phi3
  Matrix act_deriv;  // f'(theta2 * phi3), batch x hidden
  // Batch means of 0.5 * |xi_i|^2 for layers 1..3.
  std::array<double, 3> energies{};
};

struct ActivationResult {
  Matrix value;
  Matrix derivative;
};

ActivationResult activation_eval(Activation kind, const Matrix& x);

// When state.phi1 is present it is the observation and `input` is ignored.
ErrorState compute_errors(const ModelParams& params, const LatentState& state,
                          const Matrix& input, PrecisionGate gate);

struct FreeEnergy {
  Vector per_example;
  double batch_mean = 0.0;
};

FreeEnergy free_energy(const ErrorState& errors);

struct LatentGradients {
  Matrix d_phi2;
  Matrix d_phi3;
  std::optional<Matrix> d_phi1;
};

struct WeightGradients {
  Matrix d_theta1;
  Matrix d_theta2;
};

// Which latent coordinates stay fixed during an inference step.
struct ClampMask {
  bool phi2 = false;
  bool phi3 = false;
  std::optional<PixelMask> phi1;  // true = clamped input coordinate

  static ClampMask none() { return {}; }
};

// d_phi1 is produced only when state.phi1 is present; clamped phi1
// coordinates get a zero gradient.
LatentGradients inference_gradients(const ModelParams& params,
                                    const LatentState& state,
                                    const ErrorState& errors,
                                    const ClampMask& clamp = {});

// Batch-mean gradients with respect to theta1 and theta2.
WeightGradients learning_gradients(const ModelParams& params,
                                   const LatentState& state,
                                   const ErrorState& errors);

// One plain gradient-descent step on every unclamped latent block.
LatentState inference_step(const ModelParams& params, const LatentState& state,
                           const Matrix& input, PrecisionGate gate,
                           double alpha, const ClampMask& clamp = {});

}  // namespace pcn
