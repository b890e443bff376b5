#include "pcn/gradcheck.hpp"

#include <cmath>

namespace pcn {

AnalyticGradients library_gradients(const ModelParams& params,
                                    const LatentState& state,
                                    const ErrorState& errors,
                                    const ClampMask& clamp) {
  return {inference_gradients(params, state, errors, clamp),
          learning_gradients(params, state, errors)};
}

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

// Sum over the batch of per-example free energies.
double total_energy(const ModelParams& p, const LatentState& s,
                    const Matrix& input) {
  return free_energy(compute_errors(p, s, input, PrecisionGate::open()))
      .per_example.sum();
}

struct Probe {
  std::string name;
  const Matrix* analytic;
  // Returns energy with coordinate (i, j) of this block shifted by `delta`.
  std::function<double(Eigen::Index, Eigen::Index, double)> energy;
  // Scales the numeric derivative so it matches the analytic convention.
  double scale;
  std::function<bool(Eigen::Index, Eigen::Index)> skip;
};

}  // namespace

GradcheckReport run_gradcheck(const GradcheckOptions& o,
                              const GradientProvider& provider) {
  Rng rng(o.seed);
  const auto d1 = static_cast<Eigen::Index>(o.dims.input);
  const auto d2 = static_cast<Eigen::Index>(o.dims.hidden);
  const auto d3 = static_cast<Eigen::Index>(o.dims.top);

  const ModelParams params(random_matrix(d1, d2, rng, 0.5),
                           random_matrix(d2, d3, rng, 0.5), o.activation);
  LatentState state{random_matrix(o.batch, d2, rng, 1.0),
                    random_matrix(o.batch, d3, rng, 1.0), std::nullopt};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix input(o.batch, d1);
  for (Eigen::Index i = 0; i < input.size(); ++i) input.data()[i] = unit(rng);

  // The input-layer block is checked on a recall-style state where phi1 is
  // free on its second half.
  LatentState recall_state = state;
  recall_state.phi1 = input + random_matrix(o.batch, d1, rng, 0.1);
  ClampMask clamp;
  clamp.phi1 = PixelMask::Constant(d1, false);
  clamp.phi1->head(d1 / 2).setConstant(true);

  const ErrorState errors =
      compute_errors(params, state, input, PrecisionGate::open());
  const AnalyticGradients g = provider(params, state, errors, ClampMask::none());
  const ErrorState recall_errors =
      compute_errors(params, recall_state, input, PrecisionGate::open());
  const AnalyticGradients gr =
      provider(params, recall_state, recall_errors, clamp);

  const double batch = static_cast<double>(o.batch);
  std::vector<Probe> probes;
  probes.push_back({"phi2", &g.latent.d_phi2,
                    [&](Eigen::Index i, Eigen::Index j, double dlt) {
                      LatentState s = state;
                      s.phi2(i, j) += dlt;
                      return total_energy(params, s, input);
                    },
                    1.0, nullptr});
  probes.push_back({"phi3", &g.latent.d_phi3,
                    [&](Eigen::Index i, Eigen::Index j, double dlt) {
                      LatentState s = state;
                      s.phi3(i, j) += dlt;
                      return total_energy(params, s, input);
                    },
                    1.0, nullptr});
  if (gr.latent.d_phi1) {
    probes.push_back({"phi1", &*gr.latent.d_phi1,
                      [&](Eigen::Index i, Eigen::Index j, double dlt) {
                        LatentState s = recall_state;
                        (*s.phi1)(i, j) += dlt;
                        return total_energy(params, s, input);
                      },
                      1.0,
                      [&](Eigen::Index, Eigen::Index j) {
                        return (*clamp.phi1)(j);
                      }});
  }
  // Weight gradients are batch means.
  probes.push_back({"theta1", &g.weights.d_theta1,
                    [&](Eigen::Index i, Eigen::Index j, double dlt) {
                      Matrix t = params.theta1();
                      t(i, j) += dlt;
                      return total_energy(
                          ModelParams(t, params.theta2(), params.activation()),
                          state, input);
                    },
                    1.0 / batch, nullptr});
  probes.push_back({"theta2", &g.weights.d_theta2,
                    [&](Eigen::Index i, Eigen::Index j, double dlt) {
                      Matrix t = params.theta2();
                      t(i, j) += dlt;
                      return total_energy(
                          ModelParams(params.theta1(), t, params.activation()),
                          state, input);
                    },
                    1.0 / batch, nullptr});

  GradcheckReport report;
  for (const auto& p : probes) {
    GradcheckBlock block;
    block.name = p.name;
    for (Eigen::Index i = 0; i < p.analytic->rows(); ++i) {
      for (Eigen::Index j = 0; j < p.analytic->cols(); ++j) {
        const double analytic = (*p.analytic)(i, j);
        double numeric = 0.0;
        if (p.skip && p.skip(i, j)) {
          numeric = 0.0;  // clamped coordinates must report zero
        } else {
          numeric = p.scale * (p.energy(i, j, o.step) - p.energy(i, j, -o.step)) /
                    (2.0 * o.step);
        }
        const double denom =
            std::max({std::abs(analytic), std::abs(numeric), o.floor});
        const double rel = std::abs(analytic - numeric) / denom;
        ++block.checked;
        block.max_rel_error = std::max(block.max_rel_error, rel);
        if (!(rel < o.tolerance)) {
          block.offenders.push_back({i, j, analytic, numeric, rel});
        }
      }
    }
    if (!block.offenders.empty()) report.passed = false;
    report.blocks.push_back(std::move(block));
  }
  return report;
}

}  // namespace pcn
