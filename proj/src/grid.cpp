#include "raden/grid.hpp"

#include <cmath>
#include <string>

#include "raden/error.hpp"

namespace raden {

PixelGrid::PixelGrid(std::span<const double> origin, std::span<const double> spacing,
                     std::span<const std::size_t> shape) {
  const std::size_t n = origin.size();
  require(n >= 1 && n <= kMaxDim, "pixel grid dimension must be 1, 2 or 3");
  require(spacing.size() == n && shape.size() == n, "pixel grid origin/spacing/shape lengths differ");
  dim_ = static_cast<int>(n);
  size_ = 1;
  pixel_volume_ = 1.0;
  for (std::size_t a = 0; a < n; ++a) {
    require(std::isfinite(origin[a]), "pixel grid origin must be finite");
    require(std::isfinite(spacing[a]) && spacing[a] > 0.0, "pixel spacing must be strictly positive");
    require(shape[a] >= 1, "pixel grid shape must be positive on every axis");
    origin_[a] = origin[a];
    spacing_[a] = spacing[a];
    shape_[a] = shape[a];
    size_ *= shape[a];
    pixel_volume_ *= spacing[a];
  }
}

PixelGrid PixelGrid::covering(std::span<const double> lo, std::span<const double> hi,
                              std::span<const std::size_t> shape) {
  require(lo.size() == hi.size() && lo.size() == shape.size(), "box and shape dimensions differ");
  std::array<double, kMaxDim> spacing{};
  for (std::size_t a = 0; a < lo.size() && a < kMaxDim; ++a) {
    require(hi[a] > lo[a], "box must have positive extent on every axis");
    require(shape[a] >= 1, "pixel grid shape must be positive on every axis");
    spacing[a] = (hi[a] - lo[a]) / static_cast<double>(shape[a]);
  }
  return PixelGrid(lo, std::span<const double>(spacing.data(), lo.size()), shape);
}

PixelGrid::Point PixelGrid::box_center() const {
  Point c{};
  for (int a = 0; a < dim_; ++a) c[a] = origin_[a] + 0.5 * spacing_[a] * static_cast<double>(shape_[a]);
  return c;
}

double PixelGrid::diagonal() const {
  double sq = 0.0;
  for (int a = 0; a < dim_; ++a) {
    const double len = spacing_[a] * static_cast<double>(shape_[a]);
    sq += len * len;
  }
  return std::sqrt(sq);
}

PixelGrid::Index PixelGrid::unravel(std::size_t i) const {
  Index idx{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    idx[a] = i % shape_[a];
    i /= shape_[a];
  }
  return idx;
}

std::size_t PixelGrid::ravel(const Index& idx) const {
  std::size_t i = 0;
  for (int a = dim_ - 1; a >= 0; --a) i = i * shape_[a] + idx[a];
  return i;
}

PixelGrid::Point PixelGrid::center(std::size_t i) const {
  const Index idx = unravel(i);
  Point c{};
  for (int a = 0; a < dim_; ++a) c[a] = center_coord(a, idx[a]);
  return c;
}

std::optional<std::size_t> PixelGrid::locate(std::span<const double> point) const {
  require(point.size() == static_cast<std::size_t>(dim_), "point dimension does not match grid");
  Index idx{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    const double t = (point[a] - origin_[a]) / spacing_[a];
    if (!(t >= 0.0) || t > static_cast<double>(shape_[a])) return std::nullopt;
    auto k = static_cast<std::size_t>(t);
    if (k == shape_[a]) --k;
    idx[a] = k;
  }
  return ravel(idx);
}

}  // namespace raden
