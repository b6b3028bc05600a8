#include <benchmark/benchmark.h>

#include "iesdr/environment.hpp"
#include "iesdr/rng.hpp"

namespace {

void BM_EnvStep(benchmark::State& state) {
  iesdr::GeneratorOptions opt;
  opt.days = 2;
  iesdr::Environment env(iesdr::SystemParams::defaults(),
                         iesdr::generate_profiles(1, opt, {}), {}, 1);
  auto rng = iesdr::make_rng(3);
  int ep = 0;
  env.reset(ep);
  for (auto _ : state) {
    if (env.state().done) env.reset(++ep);
    std::array<double, 6> a{};
    for (auto& v : a) v = 2.0 * iesdr::uniform01(rng) - 1.0;
    auto r = env.step(a);
    benchmark::DoNotOptimize(r.reward);
  }
}
BENCHMARK(BM_EnvStep);

void BM_EnvEpisode(benchmark::State& state) {
  iesdr::GeneratorOptions opt;
  opt.days = 2;
  iesdr::Environment env(iesdr::SystemParams::defaults(),
                         iesdr::generate_profiles(1, opt, {}), {}, 1);
  int ep = 0;
  for (auto _ : state) {
    env.reset(ep++);
    double total = 0.0;
    for (int t = 0; t < 24; ++t) total += env.step({0, 0, 0, 0, 0, 0}).reward;
    benchmark::DoNotOptimize(total);
  }
}
BENCHMARK(BM_EnvEpisode);

}  // namespace
