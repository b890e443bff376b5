#include <benchmark/benchmark.h>

#include <pcn/experiment.hpp>
#include <pcn/optim.hpp>

using namespace pcn;

namespace {

const Dims kDims{784, 35, 2};

Matrix uniform_images(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  Matrix m(n, 784);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

}  // namespace

static void BM_ComputeErrors(benchmark::State& st) {
  const ModelParams p = init_params(kDims, Activation::Tanh, 0);
  const Matrix u = uniform_images(st.range(0), 1);
  const LatentState s = init_latents_indexed(kDims, st.range(0), 2, 0, 0.1);
  for (auto _ : st) {
    benchmark::DoNotOptimize(compute_errors(p, s, u, PrecisionGate::open()));
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_ComputeErrors)->Arg(1)->Arg(64)->Arg(256);

static void BM_InferenceStep(benchmark::State& st) {
  const ModelParams p = init_params(kDims, Activation::Tanh, 0);
  const Matrix u = uniform_images(st.range(0), 1);
  LatentState s = init_latents_indexed(kDims, st.range(0), 2, 0, 0.1);
  for (auto _ : st) {
    s = inference_step(p, s, u, PrecisionGate::open(), 0.01);
    benchmark::DoNotOptimize(s.phi2.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_InferenceStep)->Arg(1)->Arg(64)->Arg(256);

static void BM_AdamStep(benchmark::State& st) {
  Rng rng(3);
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix theta = Matrix::Zero(784, 35);
  Matrix grad(784, 35);
  for (Eigen::Index i = 0; i < grad.size(); ++i) grad.data()[i] = d(rng);
  AdamState a = AdamState::zeros_like(theta, AdamConfig{});
  for (auto _ : st) {
    auto [next, state] = adam_step(theta, grad, std::move(a));
    theta = std::move(next);
    a = std::move(state);
  }
}
BENCHMARK(BM_AdamStep);

static void BM_TrainBatch(benchmark::State& st) {
  ExperimentConfig c = ExperimentConfig::experiment1();
  c.dims = kDims;
  c.mode = st.range(0) ? TrainingMode::IPC : TrainingMode::PC;
  const Matrix batch = uniform_images(64, 1);
  BatchStepState state{init_params(kDims, c.activation, 0),
                       AdamState::zeros(784, 35, c.adam), AdamState::zeros(35, 2, c.adam)};
  for (auto _ : st) {
    benchmark::DoNotOptimize(
        train_batch(c, batch, init_latents_indexed(kDims, 64, 2, 0, 0.1), state));
  }
  st.SetLabel(st.range(0) ? "ipc" : "pc");
}
BENCHMARK(BM_TrainBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
