#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>

namespace raden {

/// Regular pixel (voxel) grid in 1 to 3 dimensions.
///
/// Pixels are enumerated row-major with axis 0 varying fastest, so a 2-D
/// index is `iy * nx + ix`. Pixel centers are exactly
/// `origin + (k + 1/2) * spacing` along every axis.
class PixelGrid {
 public:
  static constexpr int kMaxDim = 3;
  using Point = std::array<double, kMaxDim>;
  using Index = std::array<std::size_t, kMaxDim>;

  PixelGrid(std::span<const double> origin, std::span<const double> spacing,
            std::span<const std::size_t> shape);

  /// Grid of `shape` pixels exactly covering the box [lo, hi].
  static PixelGrid covering(std::span<const double> lo, std::span<const double> hi,
                            std::span<const std::size_t> shape);

  int dim() const { return dim_; }
  std::size_t size() const { return size_; }
  double pixel_volume() const { return pixel_volume_; }
  double box_volume() const { return pixel_volume_ * static_cast<double>(size_); }

  std::span<const double> origin() const { return {origin_.data(), static_cast<std::size_t>(dim_)}; }
  std::span<const double> spacing() const { return {spacing_.data(), static_cast<std::size_t>(dim_)}; }
  std::span<const std::size_t> shape() const { return {shape_.data(), static_cast<std::size_t>(dim_)}; }

  double lo(int axis) const { return origin_[axis]; }
  double hi(int axis) const { return origin_[axis] + spacing_[axis] * static_cast<double>(shape_[axis]); }
  Point box_center() const;
  /// Length of the box diagonal.
  double diagonal() const;

  Index unravel(std::size_t i) const;
  std::size_t ravel(const Index& idx) const;

  Point center(std::size_t i) const;
  double center_coord(int axis, std::size_t k) const {
    return origin_[axis] + (static_cast<double>(k) + 0.5) * spacing_[axis];
  }

  /// Pixel containing `point`; the upper box face belongs to the last pixel.
  std::optional<std::size_t> locate(std::span<const double> point) const;

  bool operator==(const PixelGrid&) const = default;

 private:
  int dim_ = 0;
  Point origin_{};
  Point spacing_{};
  Index shape_{1, 1, 1};
  std::size_t size_ = 0;
  double pixel_volume_ = 0.0;
};

}  // namespace raden
