#include <benchmark/benchmark.h>

#include <random>

#include "dmn/online_solver.hpp"
#include "dmn/trainer.hpp"

using namespace dmn;

namespace {

Mat3 bench_compliance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::array<double, 7> pt{};
  for (auto& v : pt) v = u(rng);
  auto [p1, p2] = sample_phase_pair(pt);
  return seed % 2 ? p1.compliance() : p2.compliance();
}

MaterialNetwork active_net(int depth, int n_active) {
  MaterialNetwork net = init_random(depth, 7);
  for (int j = 0; j < net.n_leaves(); ++j)
    net.z[j] = (j < n_active) ? 0.5 + 0.5 * net.z[j] : -0.5;
  return net;
}

void BM_forward_elastic(benchmark::State& state) {
  const MaterialNetwork net = init_random(int(state.range(0)), 3);
  const Mat3 d1 = bench_compliance(1), d2 = bench_compliance(2);
  for (auto _ : state) benchmark::DoNotOptimize(forward_elastic(net, d1, d2));
}
BENCHMARK(BM_forward_elastic)->Arg(3)->Arg(5)->Arg(7);

void BM_backprop(benchmark::State& state) {
  const MaterialNetwork net = init_random(int(state.range(0)), 3);
  TrainingSample s;
  s.dp1 = bench_compliance(1);
  s.dp2 = bench_compliance(2);
  s.ddns = forward_elastic(net, s.dp1, s.dp2);
  for (auto _ : state) benchmark::DoNotOptimize(backprop(net, s));
}
BENCHMARK(BM_backprop)->Arg(3)->Arg(5)->Arg(7);

void BM_plastic_path(benchmark::State& state) {
  const MaterialRegistry reg = make_reference_materials();
  const MaterialNetwork net = active_net(7, int(state.range(0)));
  const LoadPath path = uniaxial_tension_path(25, 0.01);
  for (auto _ : state) {
    SmallStrainSolver solver(net, reg.small.at("p1-hard"), reg.small.at("p2-plastic"));
    benchmark::DoNotOptimize(solver.run_path(path));
  }
}
BENCHMARK(BM_plastic_path)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_finite_path(benchmark::State& state) {
  const MaterialRegistry reg = make_reference_materials();
  const MaterialNetwork net = active_net(5, int(state.range(0)));
  const LoadPath path = finite_uniaxial_path(25, 1.5);
  for (auto _ : state) {
    FiniteStrainSolver solver(net, reg.finite.at("p1-mr-hard"), reg.finite.at("p2-mr"));
    benchmark::DoNotOptimize(solver.run_path(path));
  }
}
BENCHMARK(BM_finite_path)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
