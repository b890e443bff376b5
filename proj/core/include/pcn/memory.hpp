#pragma once

// Memory procedures on a trained model: reconstruction, replay with the
// input pathway gated off, and recall (pattern completion) of partially
// presented images.

#include <optional>
#include <string>

#include "pcn/model.hpp"

namespace pcn {

struct LatentInit {
  std::uint64_t seed = 0;
  double scale = 0.1;  // standard deviation of the N(0, scale^2) draws
};

// Error raised when the free energy stops being finite mid-procedure.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int iteration)
      : std::runtime_error(what + " diverged at iteration " +
                           std::to_string(iteration)),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

// Latents for every row of `input`, started from indexed draws (row k uses
// stream k of init.seed) and refined for `iters` gated-open steps.
LatentState infer_latents(const ModelParams& params, const Matrix& input,
                          int iters, double alpha, const LatentInit& init);

// theta1 * phi2 after `iters` inference steps.
Matrix reconstruct(const ModelParams& params, const Matrix& input, int iters,
                   double alpha, const LatentInit& init);

struct ReplaySettings {
  double alpha = 0.01;
  int max_iters = 5000;  // per phase
  // A phase stops once no latent coordinate moves by more than this.
  double step_tolerance = 1e-8;
  bool consolidate = false;
  double consolidation_rate = 1e-4;
};

struct ReplayResult {
  Matrix images;      // theta1 * phi2 after the gated phase
  LatentState state;  // phi3 from the open phase, phi2 from the gated phase
  int open_iters = 0;
  int gated_iters = 0;
  double final_free_energy = 0.0;
  std::optional<ModelParams> consolidated;  // set only when consolidating
};

// 1. infer phi2, phi3 with the input gate open until converged;
// 2. freeze phi3 and close the gate;
// 3. re-infer phi2 alone until converged, which pulls it onto f(theta2 phi3);
// 4. optionally take one gradient step on theta2 from the final errors.
ReplayResult replay(const ModelParams& params, const Matrix& input,
                    const ReplaySettings& settings, const LatentInit& init);

// Phases 2-3 of replay, starting from an already inferred state. The input
// is carried through but has no influence while the gate is closed.
ReplayResult replay_gated(const ModelParams& params, LatentState state,
                          const Matrix& input, const ReplaySettings& settings);

struct OcclusionMask {
  PixelMask visible;  // true = known pixel, clamped during recall
  std::string tag;

  // Rows [0, rows/2) visible, the rest hidden.
  static OcclusionMask top_half(std::size_t rows = 28, std::size_t cols = 28);

  Eigen::Index hidden_count() const {
    return visible.size() - visible.count();
  }
  // Throws unless at least one pixel is visible and one is hidden.
  void validate() const;
};

struct RecallSettings {
  double alpha = 0.01;
  int max_iters = 5000;
  // Stop when no hidden pixel moves by more than this in one iteration.
  double step_tolerance = 1e-6;
  double hidden_fill = 0.0;  // initial value of hidden pixels
};

struct MemoryTaskResult {
  Matrix output;                // n x pixels
  int iterations = 0;           // max over images
  std::vector<int> iterations_per_image;
  double initial_free_energy = 0.0;  // batch mean
  double final_free_energy = 0.0;    // batch mean
  Vector masked_mse;            // per image, hidden pixels only
};

// Completes the hidden pixels of each row of `targets`. Images are processed
// independently; row k draws its latents from stream k of init.seed.
MemoryTaskResult recall(const ModelParams& params, const Matrix& targets,
                        const OcclusionMask& mask,
                        const RecallSettings& settings,
                        const LatentInit& init);

// Mean squared difference over hidden pixels of two single images.
double masked_mse(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                  const Eigen::Ref<const Eigen::RowVectorXd>& b,
                  const OcclusionMask& mask);

}  // namespace pcn
