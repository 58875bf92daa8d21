#include "raden/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "raden/error.hpp"
#include "raden/kernels.hpp"

namespace raden {

std::vector<double> kde_bandwidth(const PointCloud& cloud, const PixelGrid& grid, const KdeConfig& config) {
  require(cloud.dim() == grid.dim(), "kde: cloud and grid dimensions differ");
  const auto n = static_cast<std::size_t>(cloud.dim());
  if (config.bandwidth) {
    require(*config.bandwidth > 0.0, "kde: bandwidth must be positive");
    return std::vector<double>(n, *config.bandwidth);
  }
  require(config.rule_constant > 0.0, "kde: rule constant must be positive");
  const std::size_t m = cloud.size();
  const double shrink = std::pow(static_cast<double>(m), -1.0 / (static_cast<double>(n) + 4.0));
  std::vector<double> h(n);
  for (std::size_t a = 0; a < n; ++a) {
    double sigma = 0.0;
    if (m > 1) {
      double mean = 0.0;
      for (std::size_t i = 0; i < m; ++i) mean += cloud.point(i)[a];
      mean /= static_cast<double>(m);
      double ss = 0.0;
      for (std::size_t i = 0; i < m; ++i) ss += (cloud.point(i)[a] - mean) * (cloud.point(i)[a] - mean);
      sigma = std::sqrt(ss / static_cast<double>(m - 1));
    }
    h[a] = sigma > 0.0 ? config.rule_constant * sigma * shrink : grid.spacing()[a];
  }
  return h;
}

DensityEstimate kde(const PointCloud& cloud, const PixelGrid& grid, const KdeConfig& config) {
  if (cloud.empty()) fail(ErrorCode::degenerate_input, "kde: empty point cloud");
  const std::vector<double> h = kde_bandwidth(cloud, grid, config);
  return normalize(kernels::kde_grid(cloud, grid, h), grid);
}

double sinc(double t) {
  if (std::abs(t) < 1e-8) return 1.0 - (std::numbers::pi * t) * (std::numbers::pi * t) / 6.0;
  const double x = std::numbers::pi * t;
  return std::sin(x) / x;
}

std::vector<double> sinc_projection(const PointCloud& cloud, std::span<const double> theta,
                                    std::span<const double> s_grid, double h, std::span<const double> origin) {
  require(h > 0.0, "sinc projection: bandwidth must be positive");
  require(theta.size() == static_cast<std::size_t>(cloud.dim()), "sinc projection: direction dimension mismatch");
  require(origin.empty() || origin.size() == theta.size(), "sinc projection: origin dimension mismatch");
  double norm = 0.0;
  for (double t : theta) norm += t * t;
  require(std::abs(std::sqrt(norm) - 1.0) <= 1e-9, "sinc projection: direction must be a unit vector");
  const std::size_t m = cloud.size();
  std::vector<double> proj(m);
  for (std::size_t i = 0; i < m; ++i) {
    double dot = 0.0;
    for (std::size_t a = 0; a < theta.size(); ++a) dot += theta[a] * (cloud.point(i)[a] - (origin.empty() ? 0.0 : origin[a]));
    proj[i] = dot;
  }
  std::vector<double> out(s_grid.size(), 0.0);
  if (m == 0) return out;
  const double scale = 1.0 / (static_cast<double>(m) * h);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(s_grid.size()); ++j) {
    double acc = 0.0;
    for (double p : proj) acc += sinc((s_grid[static_cast<std::size_t>(j)] - p) / h);
    out[static_cast<std::size_t>(j)] = acc * scale;
  }
  return out;
}

namespace {

double pixel_length(const PixelGrid& grid) {
  return std::pow(grid.pixel_volume(), 1.0 / static_cast<double>(grid.dim()));
}

void check_sinogram(const Sinogram& sino, const PixelGrid& grid) {
  require(grid.dim() == 2, "filtered backprojection needs a 2-D grid");
  require(sino.angles.size() >= 2, "filtered backprojection needs at least two angles");
  require(sino.s.size() >= 2, "filtered backprojection needs at least two offsets");
  require(sino.values.size() == sino.angles.size() * sino.s.size(), "sinogram values do not match its shape");
  require(sino.origin.size() == 2, "sinogram origin must be 2-D");
  const double step = sino.s[1] - sino.s[0];
  require(step > 0.0, "sinogram offsets must increase");
  for (std::size_t i = 1; i < sino.s.size(); ++i)
    require(std::abs(sino.s[i] - sino.s[i - 1] - step) <= 1e-9 * std::max(1.0, std::abs(step)),
            "sinogram offsets must be uniformly spaced");
}

}  // namespace

std::vector<double> fbp_s_grid(const PixelGrid& grid, const FbpConfig& config) {
  require(config.s_step > 0.0, "fbp: s step must be positive");
  const double step = config.s_step * pixel_length(grid);
  const auto half = static_cast<std::ptrdiff_t>(std::ceil(0.5 * grid.diagonal() / step)) + 2;
  std::vector<double> s;
  for (std::ptrdiff_t i = -half; i <= half; ++i) s.push_back(static_cast<double>(i) * step);
  return s;
}

Sinogram sinc_sinogram(const PointCloud& cloud, const PixelGrid& grid, const FbpConfig& config) {
  require(cloud.dim() == 2 && grid.dim() == 2, "sinc sinogram needs 2-D data");
  require(config.angles >= 2, "filtered backprojection needs at least two angles");
  require(config.h > 0.0, "fbp: sinc bandwidth must be positive");
  Sinogram sino;
  sino.s = fbp_s_grid(grid, config);
  const auto c = grid.box_center();
  sino.origin = {c[0], c[1]};
  const double h = config.h * pixel_length(grid);
  sino.values.reserve(config.angles * sino.s.size());
  for (std::size_t k = 0; k < config.angles; ++k) {
    const double angle = std::numbers::pi * static_cast<double>(k) / static_cast<double>(config.angles);
    sino.angles.push_back(angle);
    const double theta[2] = {std::cos(angle), std::sin(angle)};
    const auto g = sinc_projection(cloud, theta, sino.s, h, sino.origin);
    sino.values.insert(sino.values.end(), g.begin(), g.end());
  }
  return sino;
}

std::vector<double> fbp_backproject(const Sinogram& sino, const PixelGrid& grid) {
  check_sinogram(sino, grid);
  const std::size_t S = sino.s.size();
  const std::size_t K = sino.angles.size();
  const double tau = sino.s[1] - sino.s[0];
  // Spatial Ram-Lak kernel: the inverse transform of |xi| cut off at the
  // s-grid Nyquist frequency, sampled at multiples of tau.
  std::vector<double> kernel(2 * S - 1);
  for (std::size_t d = 0; d < kernel.size(); ++d) {
    const auto n = static_cast<std::ptrdiff_t>(d) - static_cast<std::ptrdiff_t>(S - 1);
    if (n == 0) {
      kernel[d] = 1.0 / (4.0 * tau * tau);
    } else if (n % 2 != 0) {
      const double dn = static_cast<double>(n);
      kernel[d] = -1.0 / (dn * dn * std::numbers::pi * std::numbers::pi * tau * tau);
    }
  }
  std::vector<double> filtered(K * S);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(K); ++k) {
    const auto p = sino.projection(static_cast<std::size_t>(k));
    double* q = filtered.data() + static_cast<std::size_t>(k) * S;
    for (std::size_t i = 0; i < S; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < S; ++j) acc += kernel[i + S - 1 - j] * p[j];
      q[i] = tau * acc;
    }
  }
  std::vector<double> cosines(K), sines(K);
  for (std::size_t k = 0; k < K; ++k) {
    cosines[k] = std::cos(sino.angles[k]);
    sines[k] = std::sin(sino.angles[k]);
  }
  const double s0 = sino.s.front();
  const double scale = std::numbers::pi / static_cast<double>(K);
  std::vector<double> image(grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(grid.size()); ++i) {
    const auto c = grid.center(static_cast<std::size_t>(i));
    const double x = c[0] - sino.origin[0];
    const double y = c[1] - sino.origin[1];
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double t = (x * cosines[k] + y * sines[k] - s0) / tau;
      if (t < 0.0 || t > static_cast<double>(S - 1)) continue;
      const auto j = std::min(static_cast<std::size_t>(t), S - 2);
      const double frac = t - static_cast<double>(j);
      const double* q = filtered.data() + k * S;
      acc += (1.0 - frac) * q[j] + frac * q[j + 1];
    }
    image[static_cast<std::size_t>(i)] = scale * acc;
  }
  return image;
}

DensityEstimate fbp_reconstruct(const Sinogram& sinogram, const PixelGrid& grid) {
  return normalize(fbp_backproject(sinogram, grid), grid);
}

DensityEstimate os_estimate(const PointCloud& cloud, const PixelGrid& grid, const FbpConfig& config) {
  if (cloud.empty()) fail(ErrorCode::degenerate_input, "os: empty point cloud");
  return fbp_reconstruct(sinc_sinogram(cloud, grid, config), grid);
}

OsSelection os_best(const PointCloud& cloud, const PixelGrid& grid, std::span<const double> truth,
                    std::span<const double> bandwidths, const FbpConfig& config) {
  static constexpr double kDefault[] = {0.5, 1.0, 2.0};
  if (bandwidths.empty()) bandwidths = kDefault;
  std::optional<OsSelection> best;
  std::vector<double> errors;
  for (double h : bandwidths) {
    FbpConfig cfg = config;
    cfg.h = h;
    DensityEstimate est = os_estimate(cloud, grid, cfg);
    const double err = relative_error(truth, est.values);
    errors.push_back(err);
    if (!best || err < best->error) best = OsSelection{std::move(est), h, err, {}};
  }
  best->errors = std::move(errors);
  return std::move(*best);
}

}  // namespace raden
