// Microbenchmarks for the hot paths: forward/backward passes on the
// experiment architectures, Adam updates, Fisher estimation, and sample
// generation.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "contreg/continual.hpp"
#include "contreg/datagen.hpp"
#include "contreg/nn.hpp"

using namespace contreg;

namespace {

std::vector<nn::LayerSpec> autoencoder_specs() {
  std::vector<std::size_t> widths = {7, 32, 16, 8, 4, 8, 16, 32, 7};
  std::vector<nn::LayerSpec> specs;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i)
    specs.push_back({widths[i], widths[i + 1], nn::Activation::LeakyRelu, 0.05, 0.0});
  return specs;
}

nn::TrainSet make_batch(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  nn::TrainSet set;
  for (std::size_t i = 0; i < n; ++i) {
    nn::TrainSample s;
    for (int j = 0; j < 7; ++j) s.input.push_back(u(rng));
    set.push_back(std::move(s));
  }
  return set;
}

void BM_Forward(benchmark::State& state) {
  auto net = nn::Network::initialized(autoencoder_specs(), 3);
  auto batch = make_batch(1);
  for (auto _ : state)
    benchmark::DoNotOptimize(nn::forward(net, batch[0].input, nn::Mode::Eval));
}
BENCHMARK(BM_Forward);

void BM_BackwardBatch32(benchmark::State& state) {
  auto net = nn::Network::initialized(autoencoder_specs(), 3);
  auto batch = make_batch(32);
  for (auto _ : state)
    benchmark::DoNotOptimize(nn::backward(net, batch, nn::LossKind::Reconstruction));
}
BENCHMARK(BM_BackwardBatch32);

void BM_AdamStep(benchmark::State& state) {
  auto net = nn::Network::initialized(autoencoder_specs(), 3);
  auto params = net.flatten();
  nn::Vector grads(params.size(), 0.01);
  auto adam = nn::AdamState::fresh(params.size(), 1e-3);
  for (auto _ : state) {
    nn::adam_step(adam, params, grads);
    benchmark::DoNotOptimize(params.data());
  }
}
BENCHMARK(BM_AdamStep);

void BM_FisherPerSample(benchmark::State& state) {
  auto net = nn::Network::initialized(autoencoder_specs(), 3);
  auto batch = make_batch(8);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        continual::estimate_fisher_diagonal(net, batch, nn::LossKind::Reconstruction));
  state.SetItemsProcessed(state.iterations() * batch.size());
}
BENCHMARK(BM_FisherPerSample);

void BM_GeneratorSample(benchmark::State& state) {
  datagen::GeneratorConfig cfg;
  cfg.seed = 5;
  datagen::SeriesGenerator gen(cfg);
  std::mt19937_64 rng(9);
  std::size_t t = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gen.sample_at(t % 12000, t % 7, rng));
    ++t;
  }
}
BENCHMARK(BM_GeneratorSample);

}  // namespace

BENCHMARK_MAIN();
