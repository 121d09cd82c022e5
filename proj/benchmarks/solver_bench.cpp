#include <benchmark/benchmark.h>

#include <random>

#include "vmot/entropic.hpp"
#include "vmot/exact_solver.hpp"
#include "vmot/marginal.hpp"

namespace {

using namespace vmot;

// Symmetric binomial-style ladder: maturity t has t+1 equally spaced atoms
// scaled to `atoms` points per maturity, built by repeated three-point
// convolution so every consecutive pair is in convex order.
MarginalSystem ladder(std::size_t periods, std::size_t assets, double step) {
  std::vector<std::vector<DiscreteMarginal>> rows;
  std::vector<DiscreteMarginal> cur(assets, DiscreteMarginal::dirac(0.0));
  for (std::size_t t = 0; t < periods; ++t) {
    for (std::size_t i = 0; i < assets; ++i) {
      cur[i] = convolve_three_point(cur[i], step * static_cast<double>(i + 1));
    }
    rows.push_back(cur);
  }
  return MarginalSystem(std::move(rows));
}

void BM_ExactSolve(benchmark::State& state) {
  const auto periods = static_cast<std::size_t>(state.range(0));
  const VmotInstance inst =
      build_instance(ladder(periods, 1, 0.5), Payoff::parse("max(avg_t(x[t][1]), 0)"),
                     Direction::kMax);
  const LpTableau tab = assemble_lp(inst);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_exact(tab, Direction::kMax).value);
  }
  state.counters["paths"] = static_cast<double>(inst.grid().path_count());
  state.counters["rows"] = static_cast<double>(tab.rows.size());
}
BENCHMARK(BM_ExactSolve)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_ExactSolve2D(benchmark::State& state) {
  const VmotInstance inst = build_instance(
      ladder(2, 2, 0.5), Payoff::parse("max(x[2][1] + x[2][2], 0)"), Direction::kMin);
  const LpTableau tab = assemble_lp(inst);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_exact(tab, Direction::kMin).value);
  }
  state.counters["paths"] = static_cast<double>(inst.grid().path_count());
}
BENCHMARK(BM_ExactSolve2D)->Unit(benchmark::kMillisecond);

void BM_Entropic(benchmark::State& state) {
  const VmotInstance inst =
      build_instance(ladder(3, 1, 0.5), Payoff::parse("max(x[1][1], x[2][1], x[3][1])"),
                     Direction::kMax);
  EntropicOptions opt;
  opt.epsilon = static_cast<double>(state.range(0)) / 100.0;
  for (auto _ : state) {
    const EntropicResult r = solve_entropic(inst, opt);
    benchmark::DoNotOptimize(r.value);
    state.counters["sweeps"] = static_cast<double>(r.iterations);
  }
}
BENCHMARK(BM_Entropic)->Arg(50)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_ConvexOrder(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> samples(20 * n);
  for (double& s : samples) s = g(rng);
  const DiscreteMarginal mu = quantize(samples, n);
  const DiscreteMarginal nu = convolve_three_point(mu, 0.25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_convex_order(mu, nu).holds);
  }
}
BENCHMARK(BM_ConvexOrder)->Arg(16)->Arg(256)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
