#include <benchmark/benchmark.h>

#include "tfn/datasets.hpp"
#include "tfn/network.hpp"
#include "tfn/train.hpp"

namespace {

tfn::PointCloud random_cloud(int64_t n, uint64_t seed) {
  tfn::RandomEngine rng(seed);
  tfn::PointCloud cloud;
  cloud.positions = tfn::NdArray({n, 3});
  for (int64_t i = 0; i < cloud.positions.size(); ++i) cloud.positions[i] = rng.uniform(-2.0, 2.0);
  return cloud;
}

/// Forward pass of the 3-module shape network at growing cloud sizes.
void BM_TetrisForward(benchmark::State& state) {
  const auto config = tfn::tasks::default_config("tetris");
  tfn::model::Network net(tfn::tasks::build_tetris_net(config));
  net.init_params(1);
  const tfn::PointCloud cloud = random_cloud(state.range(0), 7);
  for (auto _ : state) {
    tfn::ad::Tape tape;
    benchmark::DoNotOptimize(net.forward(tape, cloud));
  }
}
BENCHMARK(BM_TetrisForward)->Arg(4)->Arg(16)->Arg(50);

/// One full training step (forward, backward, Adam) on a gravity sample.
void BM_GravityTrainStep(benchmark::State& state) {
  auto config = tfn::tasks::default_config("gravity");
  tfn::model::Network net(tfn::tasks::build_gravity_net(config));
  net.init_params(2);
  const auto sample = tfn::tasks::gen_gravity(11);
  tfn::ad::AdamState adam_state;
  for (auto _ : state) {
    tfn::ad::Tape tape;
    auto bound = net.forward(tape, sample.cloud);
    tfn::ad::Var loss = tfn::tasks::sample_loss(tape, bound.out, sample);
    tape.backward(loss);
    std::map<std::string, tfn::NdArray> grads;
    for (const auto& [name, var] : bound.param_vars) grads.emplace(name, tape.grad(var));
    tfn::ad::adam_step(net.params(), grads, adam_state, config.adam);
  }
}
BENCHMARK(BM_GravityTrainStep);

}  // namespace

BENCHMARK_MAIN();
