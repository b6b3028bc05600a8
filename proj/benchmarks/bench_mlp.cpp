#include <benchmark/benchmark.h>

#include "iesdr/mlp.hpp"
#include "iesdr/rng.hpp"

namespace {

void BM_ForwardBatch(benchmark::State& state) {
  auto rng = iesdr::make_rng(4);
  const auto net = iesdr::MlpParams::random(
      {15, static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 1},
      rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(15, 256);
  for (auto _ : state) {
    auto y = iesdr::mlp_forward(net, x);
    benchmark::DoNotOptimize(y);
  }
}
BENCHMARK(BM_ForwardBatch)->Arg(64)->Arg(128);

void BM_BackwardBatch(benchmark::State& state) {
  auto rng = iesdr::make_rng(5);
  const auto net = iesdr::MlpParams::random(
      {15, static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 1},
      rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(15, 256);
  const Eigen::MatrixXd dy = Eigen::MatrixXd::Random(1, 256);
  iesdr::MlpCache cache;
  iesdr::mlp_forward(net, x, &cache);
  for (auto _ : state) {
    auto g = iesdr::mlp_backward(net, cache, dy);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_BackwardBatch)->Arg(64)->Arg(128);

void BM_AdamStep(benchmark::State& state) {
  auto rng = iesdr::make_rng(6);
  auto net = iesdr::MlpParams::random({15, 128, 128, 1}, rng);
  auto grads = iesdr::MlpGrads::zeros_like(net);
  for (auto& w : grads.w) w.setRandom();
  auto st = iesdr::AdamState::zeros_like(net);
  for (auto _ : state) {
    iesdr::adam_step(net, grads, st, {});
    benchmark::DoNotOptimize(net.w[0](0, 0));
  }
}
BENCHMARK(BM_AdamStep);

}  // namespace
