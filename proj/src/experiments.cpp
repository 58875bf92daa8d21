#include "raden/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>

#include "raden/baselines.hpp"
#include "raden/error.hpp"

namespace raden {

namespace {

DensitySpec planar_spec(std::vector<MixtureComponent> components) {
  DensitySpec spec;
  spec.dim = 2;
  spec.domain_lo = {0.0, 0.0};
  spec.domain_hi = {100.0, 100.0};
  spec.components = std::move(components);
  spec.validate();
  return spec;
}

MixtureComponent uniform_box(double weight, double x0, double x1, double y0, double y1) {
  return {weight, UniformComponent{{x0, y0}, {x1, y1}}};
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double stddev_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double median_of(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

DensitySpec builtin_density(int which) {
  switch (which) {
    case 1:
      return random_gaussian_mixture(100, 3.0, 100.0, CounterRng(1));
    case 2:
      return planar_spec({uniform_box(0.2, 10, 60, 20, 70), uniform_box(0.2, 30, 90, 40, 95),
                          uniform_box(0.2, 5, 45, 5, 35), uniform_box(0.2, 50, 95, 5, 55),
                          uniform_box(0.2, 20, 80, 15, 85)});
    case 3:
      return planar_spec({{0.5, GaussianComponent{{35.0, 60.0}, 10.0}}, uniform_box(0.5, 50, 85, 15, 50)});
    case 4:
      return planar_spec({{0.25, ExponentialComponent{0.08, {5.0, 5.0}}},
                          {0.25, GaussianComponent{{70.0, 70.0}, 8.0}},
                          {0.25, GammaComponent{3.0, 5.0, {50.0, 10.0}}},
                          uniform_box(0.25, 10, 40, 60, 90)});
    default:
      fail(ErrorCode::validation, "built-in densities are numbered 1 to 4");
  }
}

DensitySpec manifold_density(CounterRng rng) {
  DensitySpec spec = random_gaussian_mixture(100, 3.0, 50.0, rng);
  spec.domain_lo = {-25.0, -25.0};
  spec.domain_hi = {25.0, 25.0};
  for (auto& component : spec.components)
    for (double& mu : std::get<GaussianComponent>(component.kind).mean) mu -= 25.0;
  spec.validate();
  return spec;
}

PixelGrid table_grid(const DensitySpec& spec, std::size_t pixels) {
  require(spec.dim == 2, "table grids are 2-D");
  const std::size_t shape[2] = {pixels, pixels};
  return PixelGrid::covering(spec.domain_lo, spec.domain_hi, shape);
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::sph: return "sph";
    case Method::hs: return "hs";
    case Method::kde: return "kde";
    case Method::os: return "os";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "sph") return Method::sph;
  if (name == "hs") return Method::hs;
  if (name == "kde" || name == "ker") return Method::kde;
  if (name == "os" || name == "fbp") return Method::os;
  fail(ErrorCode::validation, "unknown method '" + std::string(name) + "'");
}

TableReport run_table(const std::string& name, const std::function<DensitySpec(CounterRng)>& instance,
                      const TableOptions& options) {
  TableReport report;
  report.table = name;
  report.m = options.m;
  report.trials = options.trials;
  report.seed = options.seed;
  for (Method method : options.methods) report.methods.push_back(MethodStats{method, 0.0, 0.0, 0, {}, {}});

  const CounterRng master(options.seed);
  std::optional<PixelGrid> grid;
  std::unique_ptr<RadonOperator> sph_op, hs_op;
  auto operator_for = [&](Method method) -> const RadonOperator& {
    auto& slot = method == Method::sph ? sph_op : hs_op;
    if (!slot) {
      PipelineConfig cfg = options.pipeline;
      cfg.transform = method == Method::sph ? RegionKind::ball : RegionKind::half_space;
      slot = std::make_unique<RadonOperator>(RadonOperator::assemble(*grid, make_geometry(*grid, cfg), cfg.assemble));
    }
    return *slot;
  };

  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    const CounterRng trial_rng = master.substream(trial);
    const DensitySpec spec = instance(trial_rng.substream(0));
    if (!grid) grid = table_grid(spec);
    require(table_grid(spec) == *grid, "all table instances must share one domain");
    const PointCloud cloud = sample_density(spec, options.m, trial_rng.substream(1));
    const GroundTruthGrid truth = eval_density(spec, *grid);
    for (auto& stats : report.methods) {
      try {
        double err = 0.0;
        switch (stats.method) {
          case Method::sph:
          case Method::hs:
            err = relative_error(truth.values, estimate_density(cloud, operator_for(stats.method), options.pipeline.reg)
                                                   .estimate.values);
            break;
          case Method::kde:
            err = relative_error(truth.values, kde(cloud, *grid).values);
            break;
          case Method::os:
            err = os_best(cloud, *grid, truth.values).error;
            break;
        }
        stats.errors.push_back(err);
        if (options.on_trial) options.on_trial(trial, stats.method, err);
      } catch (const Error& e) {
        ++stats.failures;
        stats.failure_messages.push_back("trial " + std::to_string(trial) + ": " + e.what());
      }
    }
  }
  for (auto& stats : report.methods) {
    stats.mean = mean_of(stats.errors);
    stats.stddev = stddev_of(stats.errors);
  }
  return report;
}

TableReport table_t1(const TableOptions& options) {
  return run_table("T1", [](CounterRng rng) { return random_gaussian_mixture(100, 3.0, 100.0, rng); }, options);
}

TableReport table_t2(const TableOptions& options) {
  return run_table("T2", [](CounterRng) { return builtin_density(3); }, options);
}

const PatchCell& PatchTable::cell(double kappa, double radius) const {
  for (const auto& c : cells)
    if (c.kappa == kappa && c.radius == radius) return c;
  fail(ErrorCode::validation, "no patch cell for the requested kappa and radius");
}

PatchTable patch_table(const PatchTableOptions& options) {
  PatchTable table;
  table.m = options.m;
  table.trials = options.trials;
  table.seed = options.seed;
  table.transform = options.patch.transform;
  for (double kappa : options.kappas)
    for (double r : options.radii) table.cells.push_back(PatchCell{kappa, r, {}, {}, {}, 0.0, 0.0, 0});

  const CounterRng master(options.seed);
  const double vertex[3] = {0.0, 0.0, 0.0};
  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    const CounterRng trial_rng = master.substream(trial);
    const DensitySpec spec = manifold_density(trial_rng.substream(0));
    const PointCloud planar = sample_density(spec, options.m, trial_rng.substream(1));
    std::size_t index = 0;
    for (double kappa : options.kappas) {
      const PointCloud embedded = embed_paraboloid(planar, kappa);
      for (double r : options.radii) {
        PatchCell& cell = table.cells[index++];
        PatchConfig cfg = options.patch;
        cfg.radius = r;
        try {
          const PatchResult patch = reconstruct_patch(embedded, vertex, cfg, options.reg);
          const PixelGrid grid = patch.estimate->grid;
          const auto truth = paraboloid_patch_truth(spec, kappa, patch, vertex, r, grid);
          cell.errors.push_back(relative_error(truth, patch.estimate->values));
          cell.neighborhood_sizes.push_back(patch.neighborhood_size);
          cell.selected_dims.push_back(patch.selected_dim);
        } catch (const Error&) {
          ++cell.failures;
        }
        if (options.on_trial) options.on_trial(cell, trial);
      }
    }
  }
  for (auto& cell : table.cells) {
    cell.median = median_of(cell.errors);
    cell.mean = mean_of(cell.errors);
  }
  return table;
}

RateReport rate_experiment(const DensitySpec& spec, const std::vector<std::size_t>& m_list,
                           const PipelineConfig& config, std::size_t trials, std::uint64_t seed,
                           const PixelGrid& grid) {
  require(m_list.size() >= 4, "rate experiment needs at least four sample sizes");
  require(trials >= 1, "rate experiment needs at least one trial");
  spec.validate();
  const RadonOperator op = RadonOperator::assemble(grid, make_geometry(grid, config), config.assemble);
  const GroundTruthGrid truth = eval_density(spec, grid);
  const CounterRng master(seed);
  RateReport report;
  for (std::size_t k = 0; k < m_list.size(); ++k) {
    RatePoint point;
    point.m = m_list[k];
    std::vector<double> logs;
    for (std::size_t t = 0; t < trials; ++t) {
      try {
        const PointCloud cloud = sample_density(spec, point.m, master.substream(k).substream(t));
        const double err = relative_error(truth.values, estimate_density(cloud, op, config.reg).estimate.values);
        point.errors.push_back(err);
        logs.push_back(std::log(err));
      } catch (const Error&) {
        ++point.failures;
      }
    }
    point.mean_log_error = mean_of(logs);
    point.std_log_error = stddev_of(logs);
    report.points.push_back(point);
  }
  std::vector<double> xs, ys;
  for (const auto& p : report.points)
    if (!p.errors.empty()) {
      xs.push_back(std::log(static_cast<double>(p.m)));
      ys.push_back(p.mean_log_error);
    }
  if (xs.size() < 2) fail(ErrorCode::degenerate_input, "rate experiment: fewer than two sample sizes succeeded");
  const double mx = mean_of(xs), my = mean_of(ys);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  report.slope = sxy / sxx;
  report.intercept = my - report.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (report.intercept + report.slope * xs[i]);
    rss += r * r;
  }
  report.fit_residual = std::sqrt(rss / static_cast<double>(xs.size()));
  return report;
}

}  // namespace raden
