// Microbenchmarks over the hot paths: the scalar Gaussian kernels, the
// per-observation F/E assembly, the cost quadratures, Monte-Carlo
// throughput, and one full local optimization.

#include <benchmark/benchmark.h>

#include <cmath>

#include "witsbench/costs.hpp"
#include "witsbench/gaussian.hpp"
#include "witsbench/montecarlo.hpp"
#include "witsbench/optimizer.hpp"
#include "witsbench/quadrature.hpp"
#include "witsbench/strategies.hpp"

namespace {

using namespace witsbench;

const problem_config cfg{1.0, 0.1};

lope_params params_for(int n) {
  switch (n) {
    case 1:
      return lope_params{1, {0.4}, {0.0}};
    case 2:
      return lope_params{2, {0.2, 0.5}, {0.0, 0.8}};
    case 4:
      return lope_params{4, {0.1, 0.35, 0.7, 1.1}, {0.0, 0.5, 1.1, 1.9}};
    default:
      return lope_params{8,
                         {0.1, 0.25, 0.4, 0.6, 0.8, 1.0, 1.25, 1.5},
                         {0.0, 0.35, 0.7, 1.1, 1.5, 1.9, 2.4, 3.0}};
  }
}

void BM_std_normal_cdf(benchmark::State& state) {
  double x = -8.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(std_normal_cdf(x));
    x += 1e-3;
    if (x > 8.0) x = -8.0;
  }
}
BENCHMARK(BM_std_normal_cdf);

void BM_cdf_difference_same_tail(benchmark::State& state) {
  double shift = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cdf_difference(7.0 + shift, 7.5 + shift));
    shift = (shift > 1.0) ? 0.0 : shift + 1e-3;
  }
}
BENCHMARK(BM_cdf_difference_same_tail);

void BM_fe_terms(benchmark::State& state) {
  const lope_params p = params_for(static_cast<int>(state.range(0)));
  double y = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fe_terms(p, cfg, y));
    y += 1e-2;
    if (y > 3.0) y = -3.0;
  }
}
BENCHMARK(BM_fe_terms)->Arg(1)->Arg(4)->Arg(8);

void BM_conditional_mean(benchmark::State& state) {
  const lope_params p = params_for(4);
  double y = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(conditional_mean(p, cfg, y));
    y += 1e-2;
    if (y > 3.0) y = -3.0;
  }
}
BENCHMARK(BM_conditional_mean);

void BM_estimation_cost(benchmark::State& state) {
  const lope_params p = params_for(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimation_cost(p, cfg, {}));
  }
}
BENCHMARK(BM_estimation_cost)->Arg(1)->Arg(4)->Arg(8)
    ->Unit(benchmark::kMillisecond);

void BM_quadrature_unit_gaussian(benchmark::State& state) {
  const auto f = [](double x) {
    return 0.3989422804014327 * std::exp(-0.5 * x * x);
  };
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate(f, -10.0, 10.0, {}));
  }
}
BENCHMARK(BM_quadrature_unit_gaussian);

void BM_normal_pair(benchmark::State& state) {
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(normal_pair(42, i++));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * 2);
}
BENCHMARK(BM_normal_pair);

void BM_simulate(benchmark::State& state) {
  const lope_params p = params_for(4);
  sim_config sim;
  sim.samples = 100'000;
  sim.seed = 42;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate(lope_strategy{p}, cfg, sim, decoder::exact_mmse()));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(sim.samples));
}
BENCHMARK(BM_simulate)->Unit(benchmark::kMillisecond);

void BM_optimize_one_step(benchmark::State& state) {
  weighted_objective obj;
  obj.omega = 0.5;
  obj.n = 1;
  obj.cfg = cfg;
  optimize_options opts;
  opts.restarts = 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimize_at(obj, opts));
  }
}
BENCHMARK(BM_optimize_one_step)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
