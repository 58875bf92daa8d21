#include "raden/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "raden/error.hpp"

namespace raden {

namespace {

void check_inputs(double m, double p) {
  require(m >= 1.0 && std::isfinite(m), "sample count must be at least 1");
  require(p > 0.0 && p < 1.0, "failure probability must lie in (0, 1)");
}

void check_count(double K) { require(K >= 1.0 && std::isfinite(K), "projection count must be at least 1"); }

}  // namespace

double dkw_epsilon(double m, double p) {
  check_inputs(m, p);
  return std::sqrt(std::log(2.0 / p) / (2.0 * m));
}

double sphere_surface_area(int n) {
  require(n >= 1, "dimension must be at least 1");
  if (n > 10) fail(ErrorCode::unsupported, "sphere surface areas are provided for n <= 10");
  const double half = static_cast<double>(n) / 2.0;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

double halfspace_l2_bound(double m, double K, double p, int n) {
  check_inputs(m, p);
  check_count(K);
  return sphere_surface_area(n) * std::log(2.0 * K / p) / m;
}

double spherical_l2_bound(double m, double K, double p) {
  check_inputs(m, p);
  check_count(K);
  return (std::log(K) + std::log(2.0 / p)) / m;
}

double reconstruction_l2_bound(double c, double rho, double data_bound, int n) {
  require(c > 0.0 && rho > 0.0 && data_bound >= 0.0, "bound constants must be positive");
  require(n >= 1, "dimension must be at least 1");
  const double nn = static_cast<double>(n);
  return c * std::pow(data_bound, 1.0 / (2.0 * (nn + 2.0))) * std::pow(rho, 1.0 - 1.0 / (nn + 2.0));
}

namespace alt {

// Surface areas by the recurrence |S^{n-1}| = 2 pi |S^{n-3}| / (n - 2).
double surface_area(int n) {
  require(n >= 1, "dimension must be at least 1");
  if (n > 10) fail(ErrorCode::unsupported, "sphere surface areas are provided for n <= 10");
  double area = (n % 2 == 1) ? 2.0 : 2.0 * std::numbers::pi;
  for (int k = (n % 2 == 1) ? 3 : 4; k <= n; k += 2) area *= 2.0 * std::numbers::pi / static_cast<double>(k - 2);
  return area;
}

double dkw_epsilon(double m, double p) {
  check_inputs(m, p);
  return std::exp(0.5 * (std::log(std::log1p((2.0 - p) / p)) - std::log(m) - std::numbers::ln2));
}

double halfspace_l2_bound(double m, double K, double p, int n) {
  check_inputs(m, p);
  check_count(K);
  return surface_area(n) * (std::numbers::ln2 + std::log(K) - std::log(p)) * std::exp(-std::log(m));
}

double spherical_l2_bound(double m, double K, double p) {
  check_inputs(m, p);
  check_count(K);
  return std::log(2.0 * K / p) / m;
}

}  // namespace alt

double box_projection_cdf(std::span<const double> lo, std::span<const double> hi, std::span<const double> theta,
                          double t) {
  // theta . X is a sum of independent uniforms Y_k on [a_k, b_k]. With n_eff
  // nondegenerate terms of widths w_k:
  //   F(t) = sum over corners (-1)^{#upper} (t - corner)_+^{n_eff} / (n_eff! prod w_k).
  double shift = 0.0;
  std::vector<double> a, w;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double u = theta[k] * lo[k];
    const double v = theta[k] * hi[k];
    if (std::abs(v - u) <= 1e-12 * std::max({1.0, std::abs(u), std::abs(v)})) {
      shift += 0.5 * (u + v);
      continue;
    }
    a.push_back(std::min(u, v));
    w.push_back(std::abs(v - u));
  }
  const double x = t - shift;
  const std::size_t n = a.size();
  if (n == 0) return x >= 0.0 ? 1.0 : 0.0;
  double lower = 0.0, upper = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    lower += a[k];
    upper += a[k] + w[k];
  }
  if (x <= lower) return 0.0;
  if (x >= upper) return 1.0;
  double denom = 1.0;
  for (std::size_t k = 0; k < n; ++k) denom *= w[k] * static_cast<double>(k + 1);
  double sum = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double corner = 0.0;
    int upper_count = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask & (std::size_t{1} << k)) {
        corner += a[k] + w[k];
        ++upper_count;
      } else {
        corner += a[k];
      }
    }
    const double d = x - corner;
    if (d > 0.0) sum += (upper_count % 2 ? -1.0 : 1.0) * std::pow(d, static_cast<double>(n));
  }
  return std::clamp(sum / denom, 0.0, 1.0);
}

double projected_cdf(const DensitySpec& spec, std::span<const double> theta, double t) {
  require(theta.size() == static_cast<std::size_t>(spec.dim), "direction dimension does not match the spec");
  double total = 0.0;
  for (const auto& component : spec.components) {
    const auto* box = std::get_if<UniformComponent>(&component.kind);
    if (!box) fail(ErrorCode::unsupported, "projected CDFs are available for uniform boxes only");
    for (std::size_t k = 0; k < box->lo.size(); ++k)
      if (box->lo[k] < spec.domain_lo[k] || box->hi[k] > spec.domain_hi[k])
        fail(ErrorCode::unsupported, "uniform boxes must lie inside the domain for exact projected CDFs");
    total += component.weight * box_projection_cdf(box->lo, box->hi, theta, t);
  }
  return total;
}

CoverageReport coverage_experiment(const DensitySpec& spec, std::size_t m, std::size_t directions, double p,
                                   std::size_t trials, std::uint64_t seed) {
  spec.validate();
  require(spec.dim == 2, "coverage experiment uses planar directions");
  require(m >= 1, "coverage experiment needs m >= 1");
  require(directions >= 1, "coverage experiment needs at least one direction");
  CoverageReport report;
  report.m = m;
  report.trials = trials;
  report.directions = directions;
  report.p = p;
  report.threshold = dkw_epsilon(static_cast<double>(m), p / static_cast<double>(directions));
  // Fails early on specs without analytic projections.
  {
    const double theta[2] = {1.0, 0.0};
    projected_cdf(spec, theta, 0.0);
  }
  if (trials == 0) return report;
  report.sup_errors.assign(trials, 0.0);
  const CounterRng master(seed);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t trial = 0; trial < static_cast<std::ptrdiff_t>(trials); ++trial) {
    const PointCloud cloud = sample_density(spec, m, master.substream(static_cast<std::uint64_t>(trial)));
    double worst = 0.0;
    std::vector<double> proj(m);
    for (std::size_t k = 0; k < directions; ++k) {
      const double angle = std::numbers::pi * static_cast<double>(k) / static_cast<double>(directions);
      const double theta[2] = {std::cos(angle), std::sin(angle)};
      for (std::size_t i = 0; i < m; ++i) proj[i] = theta[0] * cloud.point(i)[0] + theta[1] * cloud.point(i)[1];
      std::sort(proj.begin(), proj.end());
      const double dm = static_cast<double>(m);
      for (std::size_t i = 0; i < m; ++i) {
        const double F = projected_cdf(spec, theta, proj[i]);
        worst = std::max({worst, static_cast<double>(i + 1) / dm - F, F - static_cast<double>(i) / dm});
      }
    }
    report.sup_errors[static_cast<std::size_t>(trial)] = worst;
  }
  for (double e : report.sup_errors) {
    report.mean_sup_error += e;
    if (e >= report.threshold) ++report.violations;
  }
  report.mean_sup_error /= static_cast<double>(trials);
  report.violation_fraction = static_cast<double>(report.violations) / static_cast<double>(trials);
  return report;
}

}  // namespace raden
