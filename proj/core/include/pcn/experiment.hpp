#pragma once

// Training drivers (PC and incremental PC), error-curve bookkeeping, the
// convergence rule, and the evaluation battery run on a trained model.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pcn/memory.hpp"
#include "pcn/mnist.hpp"
#include "pcn/model.hpp"
#include "pcn/optim.hpp"

namespace pcn {

enum class TrainingMode { PC, IPC };
enum class DatasetScope { SingleBatch, Full };

std::string to_string(TrainingMode m);
std::string to_string(DatasetScope s);
TrainingMode training_mode_from_string(const std::string& s);
DatasetScope dataset_scope_from_string(const std::string& s);

// Training stops once every per-layer train energy has moved by less than
// `epsilon` (relative) for `patience` consecutive epochs. With window > 1
// the compared quantities are means over the last `window` epochs instead of
// single-epoch values; window == 1 is the plain per-epoch rule.
struct ConvergencePolicy {
  double epsilon = 1e-5;
  int patience = 5;
  int window = 1;
  int max_epochs = 10000;

  friend bool operator==(const ConvergencePolicy&,
                         const ConvergencePolicy&) = default;
};

struct Seeds {
  std::uint64_t weights = 0;
  std::uint64_t latents = 1;
  std::uint64_t split = 0;
  std::uint64_t shuffle = 2;
  std::uint64_t evaluation = 3;

  friend bool operator==(const Seeds&, const Seeds&) = default;
};

struct ExperimentConfig {
  std::string name = "custom";
  TrainingMode mode = TrainingMode::PC;
  Dims dims{};
  Activation activation = Activation::Tanh;
  std::size_t batch_size = 64;
  int inference_iters = 50;  // T
  double alpha = 0.01;       // inference rate
  AdamConfig adam{};         // adam.rate is the learning rate beta
  double latent_init_scale = 0.1;
  Seeds seeds{};
  ConvergencePolicy convergence{};
  DatasetScope scope = DatasetScope::Full;
  std::size_t limit_train = 0;  // 0 = whole training split
  int eval_every = 1;           // validation energies every N epochs

  // PC on one mini-batch, beta = 1e-4.
  static ExperimentConfig experiment1();
  // iPC on the whole training split, beta = 1e-5.
  static ExperimentConfig experiment2();
  // experiment2 restricted to the first 1000 training images.
  static ExperimentConfig experiment2_desk();

  friend bool operator==(const ExperimentConfig&,
                         const ExperimentConfig&) = default;
};

using LayerEnergies = std::array<double, 3>;

struct EpochRecord {
  int epoch = 0;
  LayerEnergies train{};
  std::optional<LayerEnergies> validation;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
};

enum class StopReason { Running, Converged, MaxEpochs };
std::string to_string(StopReason r);

struct ConvergenceDecision {
  StopReason reason = StopReason::Running;
  int epoch = -1;  // epoch at which the decision fired

  bool stop() const { return reason != StopReason::Running; }
};

ConvergenceDecision convergence_check(const TrainLog& log,
                                      const ConvergencePolicy& policy);

struct TrainingData {
  Matrix train;       // images actually trained on, in training order
  Matrix validation;  // may be empty
};

// Training images selected by the config's scope and limit: the first
// mini-batch of the training split for SingleBatch, the first `limit_train`
// examples (or all of them) for Full.
LabeledSet select_training_set(const ExperimentConfig& config,
                               const DatasetSplits& splits);

struct TrainResult {
  ModelParams params;
  AdamState adam_theta1;
  AdamState adam_theta2;
  TrainLog log;
  ConvergenceDecision stop;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

struct TrainOptions {
  unsigned threads = 1;  // evaluation workers; results do not depend on it
  EpochCallback on_epoch;
};

// Per mini-batch: fresh latents, T inference steps, one Adam update.
TrainResult train_pc(const ExperimentConfig& config, const TrainingData& data,
                     const TrainOptions& options = {});
// Per mini-batch: fresh latents, T inference steps each followed by an Adam
// update computed from the errors at that step.
TrainResult train_ipc(const ExperimentConfig& config, const TrainingData& data,
                      const TrainOptions& options = {});
TrainResult train(const ExperimentConfig& config, const TrainingData& data,
                  const TrainOptions& options = {});

// One step of either trainer on a single batch. Exposed for tests.
struct BatchStepState {
  ModelParams params;
  AdamState adam_theta1;
  AdamState adam_theta2;
};
LayerEnergies train_batch(const ExperimentConfig& config, const Matrix& batch,
                          LatentState latents, BatchStepState& state);

// Mean per-layer energies after T inference steps on every row of `images`,
// processed in mini-batches. Row k always starts from stream k of `seed`, so
// batch size and thread count do not change the result beyond rounding.
LayerEnergies evaluate_errors(const ModelParams& params, const Matrix& images,
                              int iters, double alpha, const LatentInit& init,
                              std::size_t batch_size = 64,
                              unsigned threads = 1);

struct RecallSuiteResult {
  Matrix presented;  // visible half, hidden pixels at the fill value
  Matrix recalled;
  Matrix originals;
  Vector masked_mse;
  double mean_masked_mse = 0.0;
  MemoryTaskResult raw;
};

// Recall of the first `n_images` rows of `training_images`.
RecallSuiteResult run_recall_suite(const ModelParams& params,
                                   const Matrix& training_images,
                                   std::size_t n_images,
                                   const OcclusionMask& mask,
                                   const RecallSettings& settings,
                                   const LatentInit& init);

}  // namespace pcn
