#include <benchmark/benchmark.h>

#include <random>

#include "dqlap/agent.hpp"
#include "dqlap/dataset.hpp"
#include "dqlap/env.hpp"
#include "dqlap/network.hpp"
#include "dqlap/pca.hpp"
#include "dqlap/rng.hpp"

using namespace dqlap;

namespace {

const std::vector<std::size_t> kStack = {32, 32, 24, 24, 16, 8, 4};

std::vector<double> random_input(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = uniform_double(rng);
  return v;
}

Dataset cloud(std::size_t n, std::size_t f, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.feature_count = f;
  spec.days = 1;
  spec.samples_per_day = n;
  spec.seed = seed;
  return generate_synthetic(spec);
}

void BM_Forward(benchmark::State& state) {
  const QNetwork net = build_network(31, kStack, 2, 1);
  const std::vector<double> input = random_input(31, 2);
  ForwardTrace trace;
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(net, input, trace));
  }
}
BENCHMARK(BM_Forward);

void BM_BackwardMse(benchmark::State& state) {
  QNetwork net = build_network(31, kStack, 2, 1);
  const std::vector<double> input = random_input(31, 2);
  const std::vector<double> target = {0.5, -0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(backward_mse(net, input, target));
  }
}
BENCHMARK(BM_BackwardMse);

void BM_AdamStep(benchmark::State& state) {
  QNetwork net = build_network(31, kStack, 2, 1);
  Gradients grads = make_gradients(net);
  for (auto& layer : grads.weights) {
    for (auto& g : layer) g = 0.01;
  }
  const AdamConfig cfg;
  for (auto _ : state) {
    adam_step(net, grads, cfg);
  }
}
BENCHMARK(BM_AdamStep);

void BM_LearnStep(benchmark::State& state) {
  const std::size_t batch_size = static_cast<std::size_t>(state.range(0));
  AgentConfig cfg;
  cfg.minibatch_size = batch_size;
  cfg.replay_capacity = 10000;

  AgentState st{build_network(31, kStack, 2, 1), build_network(31, kStack, 2, 1),
                Schedules{}, ReplayBuffer(cfg.replay_capacity)};
  std::mt19937_64 rng(3);
  for (std::size_t i = 0; i < 1024; ++i) {
    Experience e;
    e.state = random_input(31, rng());
    e.action = static_cast<int>(rng() % 2);
    e.reward = e.action == 0 ? 1.0 : -1.0;
    e.terminal = (rng() % 16) == 0;
    if (!e.terminal) e.next_state = random_input(31, rng());
    st.buffer.push(std::move(e));
  }
  for (auto _ : state) {
    const auto batch = st.buffer.sample(batch_size, rng);
    benchmark::DoNotOptimize(learn_step(st, batch, cfg));
  }
}
BENCHMARK(BM_LearnStep)->Arg(32)->Arg(128);

void BM_Predict(benchmark::State& state) {
  const QNetwork net = build_network(31, kStack, 2, 1);
  const Dataset data = cloud(1000, 31, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict(net, data));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Predict);

void BM_PcaProject(benchmark::State& state) {
  const Dataset data = cloud(static_cast<std::size_t>(state.range(0)), 31, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pca_project(data));
  }
}
BENCHMARK(BM_PcaProject)->Arg(500)->Arg(2000);

void BM_EpisodePass(benchmark::State& state) {
  const Dataset data = cloud(2000, 31, 6);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    CmdpEpisode episode(data, seed++);
    double sum = 0.0;
    while (!episode.done()) {
      sum += episode.step(0).reward;
    }
    benchmark::DoNotOptimize(sum);
  }
}
BENCHMARK(BM_EpisodePass);

}  // namespace

BENCHMARK_MAIN();
