// Serial reference kernels against their OpenMP counterparts.
//   fraclab_bench --benchmark_counters_tabular=true

#include <cmath>
#include <functional>
#include <vector>

#include <benchmark/benchmark.h>

#include "fraclab/grid.hpp"
#include "fraclab/kernels.hpp"
#include "fraclab/timefrac.hpp"

namespace {

using namespace fraclab;

std::vector<double> bump(std::size_t size, double scale) {
  std::vector<double> v(size);
  for (std::size_t j = 0; j < size; ++j) {
    const double x = (static_cast<double>(j) - 0.5 * static_cast<double>(size)) * scale;
    v[j] = std::exp(-x * x);
  }
  return v;
}

template <auto Kernel>
void BM_convolution(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = bump(n, 8.0 / static_cast<double>(n));
  const auto b = bump(n, 4.0 / static_cast<double>(n));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(a, b, 1.0 / static_cast<double>(n)));
  state.counters["threads"] = kernels::thread_count();
}

template <auto Kernel>
void BM_pair_sum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const GridSpec grid = make_grid(2, 8.0, n);
  std::vector<double> f(grid.size());
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = std::exp(-grid.radius(j) * grid.radius(j));
  std::vector<std::size_t> targets;
  for (std::size_t j = 0; j < grid.size(); j += 7) targets.push_back(j);
  const std::function<double(double)> k = [](double r) { return r > 0.0 ? std::pow(r, -1.5) : 0.0; };
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(grid, f, targets, k));
  state.counters["threads"] = kernels::thread_count();
}

void BM_rl_integral_serial(benchmark::State& state) {
  const TimeMesh mesh = make_time_mesh(1.0, static_cast<std::size_t>(state.range(0)));
  std::vector<double> h = mesh.nodes();
  for (double& x : h) x = std::sin(3.0 * x);
  for (auto _ : state) benchmark::DoNotOptimize(rl_integral_serial(h, 0.5, mesh));
}

void BM_rl_integral_omp(benchmark::State& state) {
  const TimeMesh mesh = make_time_mesh(1.0, static_cast<std::size_t>(state.range(0)));
  std::vector<double> h = mesh.nodes();
  for (double& x : h) x = std::sin(3.0 * x);
  for (auto _ : state) benchmark::DoNotOptimize(rl_integral(h, 0.5, mesh));
  state.counters["threads"] = kernels::thread_count();
}

void BM_rl_weighted_serial(benchmark::State& state) {
  const TimeMesh mesh = make_time_mesh(1.0, static_cast<std::size_t>(state.range(0)));
  std::vector<double> g = mesh.nodes();
  for (double& x : g) x = 1.0 + x;
  for (auto _ : state) benchmark::DoNotOptimize(rl_integral_weighted_serial(g, -0.75, 0.5, mesh));
}

void BM_rl_weighted_omp(benchmark::State& state) {
  const TimeMesh mesh = make_time_mesh(1.0, static_cast<std::size_t>(state.range(0)));
  std::vector<double> g = mesh.nodes();
  for (double& x : g) x = 1.0 + x;
  for (auto _ : state) benchmark::DoNotOptimize(rl_integral_weighted(g, -0.75, 0.5, mesh));
  state.counters["threads"] = kernels::thread_count();
}

}  // namespace

BENCHMARK(BM_convolution<kernels::serial::circular_convolution>)->Name("convolution/serial")->RangeMultiplier(4)->Range(1 << 10, 1 << 14);
BENCHMARK(BM_convolution<kernels::omp::circular_convolution>)->Name("convolution/omp")->RangeMultiplier(4)->Range(1 << 10, 1 << 14);
BENCHMARK(BM_pair_sum<kernels::serial::radial_pair_sum>)->Name("pair_sum/serial")->Arg(32)->Arg(64);
BENCHMARK(BM_pair_sum<kernels::omp::radial_pair_sum>)->Name("pair_sum/omp")->Arg(32)->Arg(64);
BENCHMARK(BM_rl_integral_serial)->Name("rl_integral/serial")->Arg(1000)->Arg(4000);
BENCHMARK(BM_rl_integral_omp)->Name("rl_integral/omp")->Arg(1000)->Arg(4000);
BENCHMARK(BM_rl_weighted_serial)->Name("rl_weighted/serial")->Arg(250)->Arg(500);
BENCHMARK(BM_rl_weighted_omp)->Name("rl_weighted/omp")->Arg(250)->Arg(500);

BENCHMARK_MAIN();
