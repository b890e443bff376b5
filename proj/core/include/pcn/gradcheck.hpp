#pragma once

// Central finite-difference check of the analytic free-energy gradients on
// a small random network.

#include <functional>
#include <string>
#include <vector>

#include "pcn/model.hpp"

namespace pcn {

struct GradcheckOptions {
  Dims dims{6, 4, 2};
  Eigen::Index batch = 3;
  double step = 1e-5;
  double tolerance = 1e-4;
  std::uint64_t seed = 0;
  Activation activation = Activation::Tanh;
  // Relative error uses max(|analytic|, |numeric|, floor) as denominator.
  double floor = 1e-6;
};

struct AnalyticGradients {
  LatentGradients latent;
  WeightGradients weights;
};

// Produces the gradients under test. Defaults to the library's own.
using GradientProvider = std::function<AnalyticGradients(
    const ModelParams&, const LatentState&, const ErrorState&,
    const ClampMask&)>;

AnalyticGradients library_gradients(const ModelParams& params,
                                    const LatentState& state,
                                    const ErrorState& errors,
                                    const ClampMask& clamp);

struct GradcheckOffender {
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradcheckBlock {
  std::string name;  // phi1, phi2, phi3, theta1, theta2
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::vector<GradcheckOffender> offenders;
};

struct GradcheckReport {
  std::vector<GradcheckBlock> blocks;
  bool passed = true;
};

GradcheckReport run_gradcheck(const GradcheckOptions& options,
                              const GradientProvider& provider =
                                  library_gradients);

}  // namespace pcn
