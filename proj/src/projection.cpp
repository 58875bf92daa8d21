#include "raden/projection.hpp"

#include <cmath>
#include <numbers>

#include "raden/error.hpp"
#include "raden/kernels.hpp"

namespace raden {

void HalfSpaceSet::validate() const {
  require(dim >= 1, "half-space set dimension must be positive");
  require(directions.size() % static_cast<std::size_t>(dim) == 0, "direction list is not a multiple of dim");
  require(origin.empty() || origin.size() == static_cast<std::size_t>(dim), "half-space origin has wrong dimension");
  for (std::size_t k = 0; k < direction_count(); ++k) {
    double sq = 0.0;
    for (double c : direction(k)) sq += c * c;
    require(std::abs(std::sqrt(sq) - 1.0) <= 1e-12, "half-space direction is not unit norm");
  }
  for (std::size_t i = 1; i < offsets.size(); ++i)
    require(offsets[i] > offsets[i - 1], "half-space offsets must be strictly increasing");
}

void BallSet::validate() const {
  require(dim >= 1, "ball set dimension must be positive");
  require(centers.size() % static_cast<std::size_t>(dim) == 0, "center list is not a multiple of dim");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(radii[i] > 0.0, "ball radii must be strictly positive");
    if (i > 0) require(radii[i] > radii[i - 1], "ball radii must be strictly increasing");
  }
  if (center_grid) {
    require(center_grid->dim() == dim, "center grid dimension mismatch");
    require(center_grid->size() == center_count(), "center grid size does not match center count");
  }
}

std::size_t geometry_rows(const ProjectionGeometry& geometry) {
  return std::visit([](const auto& g) { return g.rows(); }, geometry);
}

int geometry_dim(const ProjectionGeometry& geometry) {
  return std::visit([](const auto& g) { return g.dim; }, geometry);
}

std::size_t count_half_space(const PointCloud& cloud, double s, std::span<const double> theta) {
  require(theta.size() == static_cast<std::size_t>(cloud.dim()), "direction dimension does not match cloud");
  double sq = 0.0;
  for (double c : theta) sq += c * c;
  require(std::abs(std::sqrt(sq) - 1.0) <= 1e-9, "direction must have unit norm");
  std::size_t count = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto x = cloud.point(i);
    double proj = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) proj += (x[a] - 0.0) * theta[a];
    if (proj <= s) ++count;
  }
  return count;
}

std::size_t count_ball(const PointCloud& cloud, std::span<const double> center, double s) {
  require(center.size() == static_cast<std::size_t>(cloud.dim()), "center dimension does not match cloud");
  require(s >= 0.0, "ball radius must be nonnegative");
  const double s2 = s * s;
  std::size_t count = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto x = cloud.point(i);
    double sq = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
      const double d = x[a] - center[a];
      sq += d * d;
    }
    if (sq <= s2) ++count;
  }
  return count;
}

HalfSpaceSet make_halfspace_geometry(const PixelGrid& grid, const HalfSpaceGeometryConfig& config) {
  require(grid.dim() == 2, "half-space geometry generation needs a 2-D grid");
  require(config.directions >= 1 && config.offsets >= 1, "geometry needs at least one direction and offset");
  HalfSpaceSet set;
  set.dim = 2;
  const auto c = grid.box_center();
  set.origin = {c[0], c[1]};
  const double extent = std::max(grid.hi(0) - grid.lo(0), grid.hi(1) - grid.lo(1));
  double step = config.offset_step.value_or(
      config.offsets > 1 ? extent / static_cast<double>(config.offsets - 1) : 1.0);
  require(step > 0.0, "offset step must be positive");
  const double first = -0.5 * step * static_cast<double>(config.offsets - 1);
  set.offsets.resize(config.offsets);
  for (std::size_t i = 0; i < config.offsets; ++i) set.offsets[i] = first + step * static_cast<double>(i);
  set.directions.resize(2 * config.directions);
  for (std::size_t k = 0; k < config.directions; ++k) {
    const double angle = std::numbers::pi * static_cast<double>(k) / static_cast<double>(config.directions);
    set.directions[2 * k] = std::cos(angle);
    set.directions[2 * k + 1] = std::sin(angle);
  }
  set.validate();
  return set;
}

BallSet make_ball_geometry(const PixelGrid& grid, const BallGeometryConfig& config) {
  require(grid.dim() == 2, "ball geometry generation needs a 2-D grid");
  require(config.min_radius > 0.0 && config.max_radius >= config.min_radius && config.radius_step > 0.0,
          "ball radii configuration must satisfy 0 < min <= max, step > 0");
  BallSet set;
  set.dim = 2;
  const double pixel_length = std::sqrt(grid.pixel_volume());
  const auto count = static_cast<std::size_t>(
      std::floor((config.max_radius - config.min_radius) / config.radius_step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i)
    set.radii.push_back((config.min_radius + config.radius_step * static_cast<double>(i)) * pixel_length);
  set.centers.resize(2 * grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto c = grid.center(p);
    set.centers[2 * p] = c[0];
    set.centers[2 * p + 1] = c[1];
  }
  set.center_grid = grid;
  set.validate();
  return set;
}

MeasurementVector measure(const PointCloud& cloud, const ProjectionGeometry& geometry, Normalization normalization) {
  require(geometry_dim(geometry) == cloud.dim(), "geometry dimension does not match the point cloud");
  std::visit([](const auto& g) { g.validate(); }, geometry);
  MeasurementVector out;
  out.values = kernels::count_rows(cloud, geometry);
  out.normalization = normalization;
  out.m = cloud.size();
  if (normalization == Normalization::per_m && out.m > 0) {
    const double inv = 1.0 / static_cast<double>(out.m);
    for (double& v : out.values) v *= inv;
  }
  return out;
}

}  // namespace raden
