#include "raden/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "raden/error.hpp"

namespace raden {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double gaussian_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Per-axis CDF of a component; every shipped kind is a product measure.
double axis_cdf(const ComponentKind& kind, std::size_t axis, double x) {
  return std::visit(
      Overloaded{
          [&](const GaussianComponent& g) { return gaussian_cdf((x - g.mean[axis]) / g.sigma); },
          [&](const UniformComponent& u) {
            return std::clamp((x - u.lo[axis]) / (u.hi[axis] - u.lo[axis]), 0.0, 1.0);
          },
          [&](const ExponentialComponent& e) {
            const double t = x - e.origin[axis];
            return t <= 0.0 ? 0.0 : -std::expm1(-e.rate * t);
          },
          [&](const GammaComponent& g) {
            const double t = x - g.origin[axis];
            return t <= 0.0 ? 0.0 : boost::math::gamma_p(g.shape, t / g.scale);
          },
      },
      kind);
}

double component_pdf(const ComponentKind& kind, std::span<const double> x) {
  return std::visit(
      Overloaded{
          [&](const GaussianComponent& g) {
            double sq = 0.0;
            for (std::size_t a = 0; a < x.size(); ++a) {
              const double d = x[a] - g.mean[a];
              sq += d * d;
            }
            const double norm = std::pow(g.sigma * std::sqrt(2.0 * std::numbers::pi),
                                         static_cast<double>(x.size()));
            return std::exp(-0.5 * sq / (g.sigma * g.sigma)) / norm;
          },
          [&](const UniformComponent& u) {
            double volume = 1.0;
            for (std::size_t a = 0; a < x.size(); ++a) {
              if (x[a] < u.lo[a] || x[a] > u.hi[a]) return 0.0;
              volume *= u.hi[a] - u.lo[a];
            }
            return 1.0 / volume;
          },
          [&](const ExponentialComponent& e) {
            double value = 1.0;
            for (std::size_t a = 0; a < x.size(); ++a) {
              const double t = x[a] - e.origin[a];
              if (t < 0.0) return 0.0;
              value *= e.rate * std::exp(-e.rate * t);
            }
            return value;
          },
          [&](const GammaComponent& g) {
            double value = 1.0;
            const double log_norm = std::lgamma(g.shape) + g.shape * std::log(g.scale);
            for (std::size_t a = 0; a < x.size(); ++a) {
              const double t = x[a] - g.origin[a];
              if (t <= 0.0) return 0.0;
              value *= std::exp((g.shape - 1.0) * std::log(t) - t / g.scale - log_norm);
            }
            return value;
          },
      },
      kind);
}

void draw_component(const ComponentKind& kind, CounterRng& rng, std::span<double> out) {
  std::visit(Overloaded{
                 [&](const GaussianComponent& g) {
                   for (std::size_t a = 0; a < out.size(); ++a) out[a] = g.mean[a] + g.sigma * rng.normal();
                 },
                 [&](const UniformComponent& u) {
                   for (std::size_t a = 0; a < out.size(); ++a) out[a] = rng.uniform(u.lo[a], u.hi[a]);
                 },
                 [&](const ExponentialComponent& e) {
                   for (std::size_t a = 0; a < out.size(); ++a) out[a] = e.origin[a] + rng.exponential(e.rate);
                 },
                 [&](const GammaComponent& g) {
                   for (std::size_t a = 0; a < out.size(); ++a) out[a] = g.origin[a] + rng.gamma(g.shape, g.scale);
                 },
             },
             kind);
}

bool in_box(std::span<const double> x, const std::vector<double>& lo, const std::vector<double>& hi) {
  for (std::size_t a = 0; a < x.size(); ++a) {
    if (!(x[a] >= lo[a] && x[a] <= hi[a])) return false;
  }
  return true;
}

}  // namespace

PointCloud::PointCloud(int dim) : dim_(dim) { require(dim >= 1, "point cloud dimension must be positive"); }

PointCloud::PointCloud(int dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
  require(dim >= 1, "point cloud dimension must be positive");
  require(coords_.size() % static_cast<std::size_t>(dim) == 0,
          "coordinate count is not a multiple of the dimension");
}

void PointCloud::push_back(std::span<const double> p) {
  require(p.size() == static_cast<std::size_t>(dim_), "point has wrong dimension");
  coords_.insert(coords_.end(), p.begin(), p.end());
}

void DensitySpec::validate() const {
  require(dim >= 1, "density spec dimension must be positive");
  const auto n = static_cast<std::size_t>(dim);
  require(domain_lo.size() == n && domain_hi.size() == n, "domain box must have `dim` coordinates");
  for (std::size_t a = 0; a < n; ++a) require(domain_lo[a] < domain_hi[a], "domain box must have positive extent");
  require(!components.empty(), "density spec needs at least one component");

  double total = 0.0;
  for (const auto& c : components) {
    require(c.weight > 0.0 && std::isfinite(c.weight), "component weights must be strictly positive");
    total += c.weight;
    std::visit(Overloaded{
                   [&](const GaussianComponent& g) {
                     require(g.mean.size() == n, "gaussian mean has wrong dimension");
                     require(g.sigma > 0.0, "gaussian sigma must be positive");
                   },
                   [&](const UniformComponent& u) {
                     require(u.lo.size() == n && u.hi.size() == n, "uniform box has wrong dimension");
                     for (std::size_t a = 0; a < n; ++a) {
                       require(u.lo[a] < u.hi[a], "uniform box must have positive extent");
                       require(u.lo[a] < domain_hi[a] && u.hi[a] > domain_lo[a],
                               "uniform component does not intersect the domain box");
                     }
                   },
                   [&](const ExponentialComponent& e) {
                     require(e.origin.size() == n, "exponential origin has wrong dimension");
                     require(e.rate > 0.0, "exponential rate must be positive");
                     for (std::size_t a = 0; a < n; ++a)
                       require(e.origin[a] < domain_hi[a], "exponential component does not intersect the domain box");
                   },
                   [&](const GammaComponent& g) {
                     require(g.origin.size() == n, "gamma origin has wrong dimension");
                     require(g.shape > 0.0 && g.scale > 0.0, "gamma shape and scale must be positive");
                     for (std::size_t a = 0; a < n; ++a)
                       require(g.origin[a] < domain_hi[a], "gamma component does not intersect the domain box");
                   },
               },
               c.kind);
  }
  require(std::abs(total - 1.0) <= 1e-12, "component weights must sum to 1");
}

double mixture_pdf(const DensitySpec& spec, std::span<const double> x) {
  double value = 0.0;
  for (const auto& c : spec.components) value += c.weight * component_pdf(c.kind, x);
  return value;
}

double mixture_mass(const DensitySpec& spec, std::span<const double> lo, std::span<const double> hi) {
  require(lo.size() == static_cast<std::size_t>(spec.dim) && hi.size() == lo.size(), "box dimension mismatch");
  double mass = 0.0;
  for (const auto& c : spec.components) {
    double product = 1.0;
    for (std::size_t a = 0; a < lo.size(); ++a)
      product *= std::max(0.0, axis_cdf(c.kind, a, hi[a]) - axis_cdf(c.kind, a, lo[a]));
    mass += c.weight * product;
  }
  return mass;
}

PointCloud sample_density(const DensitySpec& spec, std::size_t m, CounterRng rng, const SamplingOptions& options) {
  spec.validate();
  PointCloud cloud(spec.dim);
  if (m == 0) return cloud;
  cloud.reserve(m);

  std::vector<double> cumulative;
  cumulative.reserve(spec.components.size());
  double acc = 0.0;
  for (const auto& c : spec.components) cumulative.push_back(acc += c.weight);

  std::vector<double> x(static_cast<std::size_t>(spec.dim));
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t attempts = 0;
    for (;;) {
      if (attempts++ >= options.max_attempts_per_point)
        fail(ErrorCode::degenerate_spec, "rejection sampling exceeded its attempt cap; the domain box holds "
                                         "almost none of the density's mass");
      const double u = rng.uniform() * acc;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                                  cumulative.size() - 1);
      draw_component(spec.components[k].kind, rng, x);
      if (in_box(x, spec.domain_lo, spec.domain_hi)) break;
    }
    cloud.push_back(x);
  }
  return cloud;
}

PointCloud sample_density(const DensitySpec& spec, std::size_t m, std::uint64_t seed, const SamplingOptions& options) {
  return sample_density(spec, m, CounterRng(seed), options);
}

GroundTruthGrid eval_density(const DensitySpec& spec, const PixelGrid& grid) {
  spec.validate();
  require(grid.dim() == spec.dim, "grid dimension does not match density spec");
  std::vector<double> values(grid.size());
  const auto n = static_cast<std::size_t>(grid.dim());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(grid.size()); ++i) {
    const auto c = grid.center(static_cast<std::size_t>(i));
    values[static_cast<std::size_t>(i)] = mixture_pdf(spec, std::span<const double>(c.data(), n));
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  if (!(sum > 0.0))
    fail(ErrorCode::degenerate_spec, "density vanishes at every pixel center of the grid");
  const double scale = 1.0 / (sum * grid.pixel_volume());
  for (double& v : values) v *= scale;
  return {grid, std::move(values)};
}

double relative_error(std::span<const double> v, std::span<const double> v_m) {
  require(v.size() == v_m.size(), "relative_error: vectors have different lengths");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - v_m[i];
    num += d * d;
    den += v[i] * v[i];
  }
  if (den == 0.0) fail(ErrorCode::division_by_zero, "relative_error: reference vector has zero norm");
  return std::sqrt(num / den);
}

DensitySpec random_gaussian_mixture(std::size_t count, double sigma, double extent, CounterRng rng) {
  require(count >= 1, "mixture needs at least one component");
  DensitySpec spec;
  spec.dim = 2;
  spec.domain_lo = {0.0, 0.0};
  spec.domain_hi = {extent, extent};
  const auto nodes = static_cast<std::uint64_t>(std::max(1.0, std::floor(extent)));
  // Equal weights that sum to one exactly in floating point would need care
  // for awkward counts; the last weight absorbs the rounding.
  const double w = 1.0 / static_cast<double>(count);
  double assigned = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    GaussianComponent g;
    g.mean = {static_cast<double>(1 + rng.below(nodes)), static_cast<double>(1 + rng.below(nodes))};
    g.sigma = sigma;
    const double weight = (k + 1 == count) ? 1.0 - assigned : w;
    assigned += weight;
    spec.components.push_back({weight, std::move(g)});
  }
  return spec;
}

}  // namespace raden
