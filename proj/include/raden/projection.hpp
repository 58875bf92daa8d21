#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "raden/grid.hpp"
#include "raden/pointcloud.hpp"

namespace raden {

/// Half spaces {x : (x - origin) . theta_k <= s_i}. Rows are ordered with the
/// direction as the outer index: row = k * offsets.size() + i.
struct HalfSpaceSet {
  int dim = 2;
  std::vector<double> directions;  // direction_count() x dim, unit norm
  std::vector<double> offsets;     // strictly increasing
  std::vector<double> origin;      // empty means the coordinate origin

  std::size_t direction_count() const { return directions.size() / static_cast<std::size_t>(dim); }
  std::size_t rows() const { return direction_count() * offsets.size(); }
  std::span<const double> direction(std::size_t k) const {
    return {directions.data() + k * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  double origin_coord(int axis) const { return origin.empty() ? 0.0 : origin[static_cast<std::size_t>(axis)]; }

  void validate() const;
};

/// Closed balls {x : |x - c_j| <= s_i}. Rows are ordered with the center as
/// the outer index: row = j * radii.size() + i.
///
/// When `center_grid` is set the centers are exactly that grid's pixel
/// centers in pixel order, and pixel membership is decided on integer pixel
/// offsets so both operator storages agree bit for bit.
struct BallSet {
  int dim = 2;
  std::vector<double> centers;  // center_count() x dim
  std::vector<double> radii;    // strictly positive, strictly increasing
  std::optional<PixelGrid> center_grid;

  std::size_t center_count() const { return centers.size() / static_cast<std::size_t>(dim); }
  std::size_t rows() const { return center_count() * radii.size(); }
  std::span<const double> center(std::size_t j) const {
    return {centers.data() + j * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }

  void validate() const;
};

using ProjectionGeometry = std::variant<HalfSpaceSet, BallSet>;

std::size_t geometry_rows(const ProjectionGeometry& geometry);
int geometry_dim(const ProjectionGeometry& geometry);

enum class Normalization { raw_counts, per_m };

struct MeasurementVector {
  std::vector<double> values;
  Normalization normalization = Normalization::per_m;
  std::size_t m = 0;
};

/// |{i : x_i . theta <= s}|.
std::size_t count_half_space(const PointCloud& cloud, double s, std::span<const double> theta);

/// |{i : |x_i - center| <= s}|.
std::size_t count_ball(const PointCloud& cloud, std::span<const double> center, double s);

struct HalfSpaceGeometryConfig {
  std::size_t directions = 180;
  std::size_t offsets = 101;
  /// Offset spacing; defaults to spanning the larger box extent, centered.
  std::optional<double> offset_step;
};

struct BallGeometryConfig {
  /// Radii in pixel lengths: min, min + step, ..., up to max inclusive.
  double min_radius = 4.0;
  double max_radius = 20.0;
  double radius_step = 1.0;
};

/// Directions pi*k/K, k < K, and offsets measured from the grid center.
HalfSpaceSet make_halfspace_geometry(const PixelGrid& grid, const HalfSpaceGeometryConfig& config = {});

/// Balls centered on every pixel center.
BallSet make_ball_geometry(const PixelGrid& grid, const BallGeometryConfig& config = {});

/// Empirical projections b_j = |X ∩ region_j| (divided by m for per_m).
MeasurementVector measure(const PointCloud& cloud, const ProjectionGeometry& geometry,
                          Normalization normalization = Normalization::per_m);

}  // namespace raden
