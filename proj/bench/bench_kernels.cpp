// Serial reference kernels against their OpenMP twins. The thread argument
// sets the OpenMP team size for the parallel variants.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <numeric>
#include <vector>

#include "raden/experiments.hpp"
#include "raden/kernels.hpp"
#include "raden/projection.hpp"
#include "raden/radon_operator.hpp"

using namespace raden;

namespace {

const DensitySpec& spec() {
  static const DensitySpec s = builtin_density(3);
  return s;
}

const PointCloud& cloud(std::size_t m) {
  static const PointCloud small = sample_density(spec(), 1000, 1);
  static const PointCloud large = sample_density(spec(), 5000, 1);
  return m <= 1000 ? small : large;
}

PixelGrid grid(std::size_t n) {
  const double lo[2] = {spec().domain_lo[0], spec().domain_lo[1]};
  const double hi[2] = {spec().domain_hi[0], spec().domain_hi[1]};
  const std::size_t shape[2] = {n, n};
  return PixelGrid::covering(lo, hi, shape);
}

const ProjectionGeometry& balls() {
  static const ProjectionGeometry g = make_ball_geometry(grid(100));
  return g;
}

const ProjectionGeometry& halfspaces() {
  static const ProjectionGeometry g = make_halfspace_geometry(grid(100));
  return g;
}

std::vector<double> ramp(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i % 997);
  return v;
}

void count_rows_reference(benchmark::State& state) {
  const ProjectionGeometry& geo = state.range(0) == 0 ? balls() : halfspaces();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::count_rows_reference(cloud(1000), geo));
}

void count_rows_parallel(benchmark::State& state) {
  const ProjectionGeometry& geo = state.range(0) == 0 ? balls() : halfspaces();
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::count_rows(cloud(1000), geo));
}

void kde_reference(benchmark::State& state) {
  const PixelGrid g = grid(100);
  const double h[2] = {3.0, 3.0};
  for (auto _ : state) benchmark::DoNotOptimize(kernels::kde_grid_reference(cloud(1000), g, h));
}

void kde_parallel(benchmark::State& state) {
  const PixelGrid g = grid(100);
  const double h[2] = {3.0, 3.0};
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::kde_grid(cloud(1000), g, h));
}

void dot_reference(benchmark::State& state) {
  const auto a = ramp(static_cast<std::size_t>(state.range(0))), b = ramp(a.size());
  for (auto _ : state) benchmark::DoNotOptimize(std::inner_product(a.begin(), a.end(), b.begin(), 0.0));
}

void dot_parallel(benchmark::State& state) {
  const auto a = ramp(static_cast<std::size_t>(state.range(0))), b = ramp(a.size());
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::dot(a, b));
}

void operator_apply(benchmark::State& state) {
  AssembleOptions opt;
  opt.storage = state.range(0) == 0 ? Storage::explicit_sparse : Storage::matrix_free;
  const PixelGrid g = grid(60);
  const RadonOperator op = RadonOperator::assemble(g, make_ball_geometry(g), opt);
  const auto v = ramp(op.cols());
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(v));
}

void threads(benchmark::internal::Benchmark* b, std::vector<std::int64_t> first) {
  const std::int64_t max = omp_get_max_threads();
  for (std::int64_t f : first) {
    b->Args({f, 1});
    if (max > 1) b->Args({f, max});
  }
}

}  // namespace

BENCHMARK(count_rows_reference)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(count_rows_parallel)->Apply([](auto* b) { threads(b, {0, 1}); })->Unit(benchmark::kMillisecond);
BENCHMARK(kde_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(kde_parallel)
    ->Apply([](auto* b) {
      b->Arg(1);
      if (omp_get_max_threads() > 1) b->Arg(omp_get_max_threads());
    })
    ->Unit(benchmark::kMillisecond);
BENCHMARK(dot_reference)->Arg(1 << 20);
BENCHMARK(dot_parallel)->Apply([](auto* b) { threads(b, {1 << 20}); });
BENCHMARK(operator_apply)->Apply([](auto* b) { threads(b, {0, 1}); })->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
