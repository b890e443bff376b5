#include "pcn/experiment.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <sstream>

namespace pcn {

std::string to_string(TrainingMode m) {
  return m == TrainingMode::PC ? "pc" : "ipc";
}

std::string to_string(DatasetScope s) {
  return s == DatasetScope::SingleBatch ? "single-batch" : "full";
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::Running:
      return "running";
    case StopReason::Converged:
      return "converged";
    case StopReason::MaxEpochs:
      return "max-epochs";
  }
  return "unknown";
}

TrainingMode training_mode_from_string(const std::string& s) {
  if (s == "pc" || s == "PC") return TrainingMode::PC;
  if (s == "ipc" || s == "iPC" || s == "IPC") return TrainingMode::IPC;
  throw std::invalid_argument("unknown training mode '" + s + "'");
}

DatasetScope dataset_scope_from_string(const std::string& s) {
  if (s == "single-batch") return DatasetScope::SingleBatch;
  if (s == "full") return DatasetScope::Full;
  throw std::invalid_argument("unknown dataset scope '" + s + "'");
}

ExperimentConfig ExperimentConfig::experiment1() {
  ExperimentConfig c;
  c.name = "exp1";
  c.mode = TrainingMode::PC;
  c.scope = DatasetScope::SingleBatch;
  c.adam.rate = 1e-4;
  c.convergence = {3e-4, 5, 1, 10000};
  c.eval_every = 100;
  return c;
}

ExperimentConfig ExperimentConfig::experiment2() {
  ExperimentConfig c;
  c.name = "exp2";
  c.mode = TrainingMode::IPC;
  c.scope = DatasetScope::Full;
  c.adam.rate = 1e-5;
  c.convergence = {1e-3, 5, 10, 500};
  c.eval_every = 5;
  return c;
}

ExperimentConfig ExperimentConfig::experiment2_desk() {
  ExperimentConfig c = experiment2();
  c.name = "exp2-desk";
  c.limit_train = 1000;
  return c;
}

namespace {

double window_mean(const std::vector<EpochRecord>& e, std::size_t end,
                   std::size_t window, std::size_t layer) {
  double s = 0.0;
  for (std::size_t i = end - window; i < end; ++i) s += e[i].train[layer];
  return s / static_cast<double>(window);
}

}  // namespace

ConvergenceDecision convergence_check(const TrainLog& log,
                                      const ConvergencePolicy& policy) {
  const auto& e = log.epochs;
  const std::size_t w = static_cast<std::size_t>(std::max(policy.window, 1));
  int streak = 0;
  for (std::size_t k = 2 * w - 1; k < e.size(); ++k) {
    bool below = true;
    for (std::size_t layer = 0; layer < 3; ++layer) {
      const double prev = window_mean(e, k + 1 - w, w, layer);
      const double cur = window_mean(e, k + 1, w, layer);
      const double denom = std::max(std::abs(prev), 1e-300);
      if (!(std::abs(cur - prev) / denom < policy.epsilon)) below = false;
    }
    streak = below ? streak + 1 : 0;
    if (streak >= policy.patience) {
      return {StopReason::Converged, e[k].epoch};
    }
  }
  if (!e.empty() && static_cast<int>(e.size()) >= policy.max_epochs) {
    return {StopReason::MaxEpochs, e.back().epoch};
  }
  return {};
}

LabeledSet select_training_set(const ExperimentConfig& config,
                               const DatasetSplits& splits) {
  if (config.scope == DatasetScope::SingleBatch) {
    return take_prefix(splits.train, config.batch_size);
  }
  return take_prefix(splits.train, config.limit_train);
}

namespace {

void adam_update(BatchStepState& s, const WeightGradients& g) {
  auto [t1, a1] = adam_step(s.params.theta1(), g.d_theta1,
                            std::move(s.adam_theta1));
  auto [t2, a2] = adam_step(s.params.theta2(), g.d_theta2,
                            std::move(s.adam_theta2));
  s.params.set_theta1(std::move(t1));
  s.params.set_theta2(std::move(t2));
  s.adam_theta1 = std::move(a1);
  s.adam_theta2 = std::move(a2);
}

}  // namespace

LayerEnergies train_batch(const ExperimentConfig& config, const Matrix& batch,
                          LatentState latents, BatchStepState& state) {
  LayerEnergies last{};
  for (int it = 0; it < config.inference_iters; ++it) {
    latents = inference_step(state.params, latents, batch,
                             PrecisionGate::open(), config.alpha);
    if (config.mode == TrainingMode::IPC) {
      const ErrorState e =
          compute_errors(state.params, latents, batch, PrecisionGate::open());
      adam_update(state, learning_gradients(state.params, latents, e));
      last = e.energies;
    }
  }
  if (config.mode == TrainingMode::PC) {
    const ErrorState e =
        compute_errors(state.params, latents, batch, PrecisionGate::open());
    adam_update(state, learning_gradients(state.params, latents, e));
    last = e.energies;
  }
  return last;
}

LayerEnergies evaluate_errors(const ModelParams& params, const Matrix& images,
                              int iters, double alpha, const LatentInit& init,
                              std::size_t batch_size, unsigned threads) {
  const auto batches = make_batches(static_cast<std::size_t>(images.rows()),
                                    batch_size, 0, false);
  std::vector<LayerEnergies> sums(batches.size());

  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      const auto& rows = batches[b];
      const auto first = static_cast<Eigen::Index>(rows.front());
      const auto n = static_cast<Eigen::Index>(rows.size());
      const Matrix input = images.middleRows(first, n);
      LatentState s = init_latents_indexed(params.dims(), n, init.seed,
                                           rows.front(), init.scale);
      for (int it = 0; it < iters; ++it) {
        s = inference_step(params, s, input, PrecisionGate::open(), alpha);
      }
      const ErrorState e =
          compute_errors(params, s, input, PrecisionGate::open());
      for (std::size_t l = 0; l < 3; ++l) {
        sums[b][l] = e.energies[l] * static_cast<double>(n);
      }
    }
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(threads, batches.size()));
  if (workers == 1) {
    run_range(0, batches.size());
  } else {
    std::vector<std::future<void>> jobs;
    const std::size_t per = (batches.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * per;
      const std::size_t end = std::min(batches.size(), begin + per);
      if (begin >= end) break;
      jobs.push_back(std::async(std::launch::async, run_range, begin, end));
    }
    for (auto& j : jobs) j.get();
  }

  // fixed reduction order
  LayerEnergies total{};
  for (const auto& s : sums)
    for (std::size_t l = 0; l < 3; ++l) total[l] += s[l];
  const double count = static_cast<double>(std::max<Eigen::Index>(images.rows(), 1));
  for (auto& v : total) v /= count;
  return total;
}

namespace {

void require_finite_energies(const LayerEnergies& e, int epoch,
                             const char* where) {
  for (double v : e) {
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite " << where << " energy at epoch " << epoch;
      throw NonFiniteError(os.str());
    }
  }
}

TrainResult run_training(const ExperimentConfig& config,
                         const TrainingData& data,
                         const TrainOptions& options) {
  if (data.train.rows() == 0) throw std::invalid_argument("empty training set");
  if (static_cast<std::size_t>(data.train.cols()) != config.dims.input) {
    throw ShapeError("training images do not match input width");
  }
  BatchStepState state{
      init_params(config.dims, config.activation, config.seeds.weights),
      AdamState::zeros(static_cast<Eigen::Index>(config.dims.input),
                       static_cast<Eigen::Index>(config.dims.hidden),
                       config.adam),
      AdamState::zeros(static_cast<Eigen::Index>(config.dims.hidden),
                       static_cast<Eigen::Index>(config.dims.top), config.adam)};
  Rng latent_rng(config.seeds.latents);
  const LatentInit eval_init{config.seeds.evaluation, config.latent_init_scale};
  const auto n = static_cast<std::size_t>(data.train.rows());
  const bool shuffle = n > config.batch_size;

  auto evaluate = [&](const Matrix& images) {
    return evaluate_errors(state.params, images, config.inference_iters,
                           config.alpha, eval_init, config.batch_size,
                           options.threads);
  };

  TrainLog log;
  ConvergenceDecision decision;
  for (int epoch = 0; !decision.stop(); ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto batches =
        make_batches(n, config.batch_size,
                     mix_seed(config.seeds.shuffle,
                              static_cast<std::uint64_t>(epoch)),
                     shuffle);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      Matrix input(static_cast<Eigen::Index>(batches[b].size()),
                   data.train.cols());
      for (std::size_t k = 0; k < batches[b].size(); ++k) {
        input.row(static_cast<Eigen::Index>(k)) =
            data.train.row(static_cast<Eigen::Index>(batches[b][k]));
      }
      LatentState latents = init_latents(config.dims, input.rows(), latent_rng,
                                         config.latent_init_scale);
      try {
        train_batch(config, input, std::move(latents), state);
      } catch (const NonFiniteError& e) {
        std::ostringstream os;
        os << "training diverged at epoch " << epoch << ", batch " << b << ": "
           << e.what();
        throw NonFiniteError(os.str());
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train = evaluate(data.train);
    require_finite_energies(rec.train, epoch, "train");
    const bool has_val = data.validation.rows() > 0;
    if (has_val && config.eval_every > 0 && epoch % config.eval_every == 0) {
      rec.validation = evaluate(data.validation);
    }
    log.epochs.push_back(rec);
    decision = convergence_check(log, config.convergence);
    if (decision.stop() && has_val && !log.epochs.back().validation) {
      log.epochs.back().validation = evaluate(data.validation);
    }
    log.epochs.back().seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (options.on_epoch) options.on_epoch(log.epochs.back());
  }

  return {std::move(state.params), std::move(state.adam_theta1),
          std::move(state.adam_theta2), std::move(log), decision};
}

}  // namespace

TrainResult train_pc(const ExperimentConfig& config, const TrainingData& data,
                     const TrainOptions& options) {
  if (config.mode != TrainingMode::PC) {
    throw std::invalid_argument("train_pc requires mode pc");
  }
  return run_training(config, data, options);
}

TrainResult train_ipc(const ExperimentConfig& config, const TrainingData& data,
                      const TrainOptions& options) {
  if (config.mode != TrainingMode::IPC) {
    throw std::invalid_argument("train_ipc requires mode ipc");
  }
  return run_training(config, data, options);
}

TrainResult train(const ExperimentConfig& config, const TrainingData& data,
                  const TrainOptions& options) {
  return config.mode == TrainingMode::PC ? train_pc(config, data, options)
                                         : train_ipc(config, data, options);
}

RecallSuiteResult run_recall_suite(const ModelParams& params,
                                   const Matrix& training_images,
                                   std::size_t n_images,
                                   const OcclusionMask& mask,
                                   const RecallSettings& settings,
                                   const LatentInit& init) {
  const auto n = static_cast<Eigen::Index>(
      std::min<std::size_t>(n_images,
                            static_cast<std::size_t>(training_images.rows())));
  RecallSuiteResult out;
  out.originals = training_images.topRows(n);
  out.presented = out.originals;
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < out.presented.cols(); ++j) {
      if (!mask.visible(j)) out.presented(k, j) = settings.hidden_fill;
    }
  }
  out.raw = recall(params, out.originals, mask, settings, init);
  out.recalled = out.raw.output;
  out.masked_mse = out.raw.masked_mse;
  out.mean_masked_mse = n == 0 ? 0.0 : out.masked_mse.mean();
  return out;
}

}  // namespace pcn
