#include "pcn/memory.hpp"

#include <cmath>

#include "pcn/optim.hpp"

namespace pcn {

namespace {

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

LatentState infer_latents(const ModelParams& params, const Matrix& input,
                          int iters, double alpha, const LatentInit& init) {
  if (iters < 1) throw std::invalid_argument("iters must be >= 1");
  LatentState state = init_latents_indexed(params.dims(), input.rows(),
                                           init.seed, 0, init.scale);
  for (int it = 0; it < iters; ++it) {
    try {
      state = inference_step(params, state, input, PrecisionGate::open(),
                             alpha);
    } catch (const NonFiniteError&) {
      throw DivergenceError("inference", it + 1);
    }
  }
  return state;
}

Matrix reconstruct(const ModelParams& params, const Matrix& input, int iters,
                   double alpha, const LatentInit& init) {
  const LatentState s = infer_latents(params, input, iters, alpha, init);
  return s.phi2 * params.theta1().transpose();
}

ReplayResult replay_gated(const ModelParams& params, LatentState state,
                          const Matrix& input, const ReplaySettings& settings) {
  ReplayResult out;
  ClampMask freeze_top;
  freeze_top.phi3 = true;
  for (int it = 0; it < settings.max_iters; ++it) {
    LatentState next;
    try {
      next = inference_step(params, state, input, PrecisionGate::closed(),
                            settings.alpha, freeze_top);
    } catch (const NonFiniteError&) {
      throw DivergenceError("replay (gated phase)", it + 1);
    }
    const double moved = max_abs_diff(next.phi2, state.phi2);
    state = std::move(next);
    out.gated_iters = it + 1;
    if (moved < settings.step_tolerance) break;
  }

  const ErrorState errors =
      compute_errors(params, state, input, PrecisionGate::closed());
  out.final_free_energy = free_energy(errors).batch_mean;
  if (settings.consolidate) {
    const WeightGradients g = learning_gradients(params, state, errors);
    ModelParams updated = params;
    updated.set_theta2(sgd_step(params.theta2(), g.d_theta2,
                                SgdConfig{settings.consolidation_rate}));
    out.consolidated = std::move(updated);
  }
  out.images = state.phi2 * params.theta1().transpose();
  out.state = std::move(state);
  return out;
}

ReplayResult replay(const ModelParams& params, const Matrix& input,
                    const ReplaySettings& settings, const LatentInit& init) {
  LatentState state = init_latents_indexed(params.dims(), input.rows(),
                                           init.seed, 0, init.scale);
  int open_iters = 0;
  for (int it = 0; it < settings.max_iters; ++it) {
    LatentState next;
    try {
      next = inference_step(params, state, input, PrecisionGate::open(),
                            settings.alpha);
    } catch (const NonFiniteError&) {
      throw DivergenceError("replay (open phase)", it + 1);
    }
    const double moved = std::max(max_abs_diff(next.phi2, state.phi2),
                                  max_abs_diff(next.phi3, state.phi3));
    state = std::move(next);
    open_iters = it + 1;
    if (moved < settings.step_tolerance) break;
  }
  ReplayResult out = replay_gated(params, std::move(state), input, settings);
  out.open_iters = open_iters;
  return out;
}

OcclusionMask OcclusionMask::top_half(std::size_t rows, std::size_t cols) {
  OcclusionMask m;
  m.visible = PixelMask::Constant(static_cast<Eigen::Index>(rows * cols), false);
  m.visible.head(static_cast<Eigen::Index>((rows / 2) * cols)).setConstant(true);
  m.tag = "top-half";
  return m;
}

void OcclusionMask::validate() const {
  const Eigen::Index shown = visible.count();
  if (shown == 0) throw std::invalid_argument("mask has no visible pixels");
  if (shown == visible.size()) {
    throw std::invalid_argument("mask has no hidden pixels");
  }
}

double masked_mse(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                  const Eigen::Ref<const Eigen::RowVectorXd>& b,
                  const OcclusionMask& mask) {
  if (a.size() != b.size() || a.size() != mask.visible.size()) {
    throw ShapeError("masked_mse: image and mask sizes differ");
  }
  double sum = 0.0;
  Eigen::Index n = 0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    if (mask.visible(j)) continue;
    const double d = a(j) - b(j);
    sum += d * d;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

MemoryTaskResult recall(const ModelParams& params, const Matrix& targets,
                        const OcclusionMask& mask,
                        const RecallSettings& settings,
                        const LatentInit& init) {
  mask.validate();
  const auto width = static_cast<Eigen::Index>(params.dims().input);
  require_shape(targets, targets.rows(), width, "recall targets");
  if (mask.visible.size() != width) {
    throw ShapeError("recall: mask length does not match input width");
  }

  ClampMask clamp;
  clamp.phi1 = mask.visible;

  MemoryTaskResult out;
  out.output.resize(targets.rows(), width);
  out.masked_mse.resize(targets.rows());
  double initial_sum = 0.0;
  double final_sum = 0.0;

  for (Eigen::Index k = 0; k < targets.rows(); ++k) {
    const Matrix target = targets.row(k);
    LatentState state = init_latents_indexed(
        params.dims(), 1, init.seed, static_cast<std::uint64_t>(k), init.scale);
    state.phi1 = mask.visible.select(
        target, Matrix::Constant(1, width, settings.hidden_fill));

    initial_sum +=
        free_energy(compute_errors(params, state, target, PrecisionGate::open()))
            .batch_mean;

    int used = 0;
    for (int it = 0; it < settings.max_iters; ++it) {
      LatentState next;
      try {
        next = inference_step(params, state, target, PrecisionGate::open(),
                              settings.alpha, clamp);
      } catch (const NonFiniteError&) {
        throw DivergenceError("recall", it + 1);
      }
      const double moved = max_abs_diff(*next.phi1, *state.phi1);
      state = std::move(next);
      used = it + 1;
      if (moved < settings.step_tolerance) break;
    }

    final_sum +=
        free_energy(compute_errors(params, state, target, PrecisionGate::open()))
            .batch_mean;
    out.output.row(k) = *state.phi1;
    out.masked_mse(k) = masked_mse(out.output.row(k), target.row(0), mask);
    out.iterations_per_image.push_back(used);
    out.iterations = std::max(out.iterations, used);
  }
  const double n = static_cast<double>(std::max<Eigen::Index>(targets.rows(), 1));
  out.initial_free_energy = initial_sum / n;
  out.final_free_energy = final_sum / n;
  return out;
}

}  // namespace pcn
