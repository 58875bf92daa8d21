#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "raden/manifold.hpp"
#include "raden/pipeline.hpp"
#include "raden/pointcloud.hpp"

namespace raden {

/// Built-in synthetic densities 1-4 on [0, 100]^2. Density 1 is the
/// realization of random_gaussian_mixture(100, 3, 100) for seed 1.
DensitySpec builtin_density(int which);

/// 100 equal-weight Gaussians, sigma 3, means uniform on the integer grid of
/// [-25, 25]^2; the planar density used for the manifold tables.
DensitySpec manifold_density(CounterRng rng);

/// Unit-pixel 100 x 100 grid on the spec's domain (any box, same shape).
PixelGrid table_grid(const DensitySpec& spec, std::size_t pixels = 100);

enum class Method { sph, hs, kde, os };
std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct MethodStats {
  Method method = Method::sph;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t failures = 0;
  std::vector<double> errors;  // successful trials only
  std::vector<std::string> failure_messages;
};

struct TableReport {
  std::string table;
  std::size_t m = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<MethodStats> methods;
};

/// Called after each finished (trial, method) with its error, for progress output.
using TrialCallback = std::function<void(std::size_t trial, Method method, double error)>;

struct TableOptions {
  std::size_t m = 1000;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  std::vector<Method> methods{Method::sph, Method::hs, Method::kde, Method::os};
  PipelineConfig pipeline;
  TrialCallback on_trial;
};

/// Errors of every method on `trials` draws. `instance(trial_rng)` returns the
/// density for a trial; the sample uses an independent substream.
TableReport run_table(const std::string& name, const std::function<DensitySpec(CounterRng)>& instance,
                      const TableOptions& options);

/// Table 1: a fresh random Gaussian mixture per trial.
TableReport table_t1(const TableOptions& options);
/// Table 2: repeated draws from density 3.
TableReport table_t2(const TableOptions& options);

struct PatchCell {
  double kappa = 0.0;
  double radius = 0.0;
  std::vector<double> errors;
  std::vector<std::size_t> neighborhood_sizes;
  std::vector<int> selected_dims;
  double median = 0.0;
  double mean = 0.0;
  std::size_t failures = 0;
};

struct PatchTableOptions {
  std::vector<double> kappas{0.01, 0.05, 0.1};
  std::vector<double> radii{5.0, 10.0, 20.0};
  std::size_t m = 5000;
  std::size_t trials = 3;
  std::uint64_t seed = 0;
  PatchConfig patch;
  RegConfig reg;
  std::function<void(const PatchCell&, std::size_t trial)> on_trial;
};

struct PatchTable {
  std::size_t m = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  RegionKind transform = RegionKind::ball;
  std::vector<PatchCell> cells;  // kappa-major

  const PatchCell& cell(double kappa, double radius) const;
};

/// Tables 3-5: per trial one planar mixture and sample, embedded for every
/// kappa and patched at the vertex for every radius.
PatchTable patch_table(const PatchTableOptions& options);

struct RatePoint {
  std::size_t m = 0;
  std::vector<double> errors;
  double mean_log_error = 0.0;
  double std_log_error = 0.0;
  std::size_t failures = 0;
};

struct RateReport {
  std::vector<RatePoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  /// Root mean square residual of the log-log fit.
  double fit_residual = 0.0;
};

/// Full pipeline per (m, trial); least-squares slope of mean log error vs log m.
RateReport rate_experiment(const DensitySpec& spec, const std::vector<std::size_t>& m_list,
                           const PipelineConfig& config, std::size_t trials, std::uint64_t seed,
                           const PixelGrid& grid);

}  // namespace raden
