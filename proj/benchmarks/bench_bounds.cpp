#include <benchmark/benchmark.h>

#include "iesdr/bounds.hpp"
#include "iesdr/rng.hpp"

namespace {

iesdr::MlpParams make_net(int width) {
  auto rng = iesdr::make_rng(1);
  return iesdr::MlpParams::random({9, width, width, 6}, rng, 0.5);
}

void BM_Ibp(benchmark::State& state) {
  const auto net = make_net(static_cast<int>(state.range(0)));
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(9, 0.1);
  for (auto _ : state) {
    auto box = iesdr::ibp(net, c, 0.1);
    benchmark::DoNotOptimize(box);
  }
}
BENCHMARK(BM_Ibp)->Arg(64)->Arg(128);

void BM_Crown(benchmark::State& state) {
  const auto net = make_net(static_cast<int>(state.range(0)));
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(9, 0.1);
  for (auto _ : state) {
    auto cb = iesdr::crown(net, c, 0.1);
    benchmark::DoNotOptimize(cb);
  }
}
BENCHMARK(BM_Crown)->Arg(64)->Arg(128);

void BM_Regularizer(benchmark::State& state) {
  const auto net = make_net(static_cast<int>(state.range(0)));
  std::vector<Eigen::VectorXd> batch;
  auto rng = iesdr::make_rng(2);
  for (int i = 0; i < 64; ++i) {
    Eigen::VectorXd v(9);
    for (int k = 0; k < 9; ++k) v(k) = 2.0 * iesdr::uniform01(rng) - 1.0;
    batch.push_back(v);
  }
  for (auto _ : state) {
    auto r = iesdr::sa_regularizer(net, batch, 0.1, 0.5);
    benchmark::DoNotOptimize(r.loss);
  }
}
BENCHMARK(BM_Regularizer)->Arg(64)->Arg(128);

}  // namespace
