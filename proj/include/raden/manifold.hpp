#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "raden/error.hpp"
#include "raden/pointcloud.hpp"
#include "raden/projection.hpp"
#include "raden/radon_operator.hpp"
#include "raden/solver.hpp"

namespace raden {

/// (x, y) -> (x, y, kappa (x^2 + y^2) / 2).
PointCloud embed_paraboloid(const PointCloud& xy, double kappa);

struct PatchConfig {
  double radius = 20.0;
  /// Variance percentage p in (0, 100].
  double variance_percent = 90.0;
  RegionKind transform = RegionKind::ball;
  /// Patch grid is grid_size x grid_size square pixels over the bounding box
  /// of the projected neighbourhood, expanded by one pixel.
  std::size_t grid_size = 50;
  HalfSpaceGeometryConfig halfspace;
  BallGeometryConfig ball;

  void validate() const;
};

/// Reconstructions run on the first two principal coordinates.
inline constexpr int kPatchDim = 2;

struct PatchResult {
  std::size_t neighborhood_size = 0;
  /// Local covariance spectrum, nonincreasing.
  std::vector<double> eigenvalues;
  /// Minimal n whose leading eigenvalues reach p% of the variance.
  int selected_dim = 0;
  /// True when selected_dim differs from the reconstruction dimension.
  bool dim_clamped = false;
  std::vector<double> mean;
  /// Principal axes, column-major d x d, axis k at [k * d, (k + 1) * d).
  std::vector<double> axes;
  /// Neighbourhood in the first kPatchDim principal coordinates.
  PointCloud coords{kPatchDim};
  std::vector<double> query_coords;
  std::optional<DensityEstimate> estimate;
  std::optional<SolveReport> report;
  double value = 0.0;
};

/// Neighbourhood S' = X within closed distance r of z, centred, PCA with the
/// largest-magnitude loading of every axis made positive.
PatchResult pca_patch(const PointCloud& cloud, std::span<const double> query, const PatchConfig& config);

/// Patch grid for the projected neighbourhood.
PixelGrid patch_grid(const PatchResult& patch, const PatchConfig& config);

/// pca_patch followed by estimate_density on the projected neighbourhood; fills
/// estimate, report and value (the containing pixel's density).
PatchResult reconstruct_patch(const PointCloud& cloud, std::span<const double> query, const PatchConfig& config,
                              const RegConfig& reg);

struct PatchQuery {
  std::optional<PatchResult> result;
  std::optional<ErrorCode> error;
  std::string message;
};

/// One independent reconstruction per query; failures are recorded per query.
std::vector<PatchQuery> patch_density(const PointCloud& cloud, const PointCloud& queries, const PatchConfig& config,
                                      const RegConfig& reg);

/// Planar density `spec` carried to the tangent patch: each pixel of the
/// disk of radius `radius` around the query's principal coordinates gets
/// f(x, y) of the paraboloid point phi(x, y) that projects onto it.
/// Normalized on the grid. Needs an embedded 3-D patch.
std::vector<double> paraboloid_patch_truth(const DensitySpec& spec, double kappa, const PatchResult& patch,
                                           std::span<const double> query, double radius, const PixelGrid& grid);

struct TangentBound {
  double estimate = 0.0;
  double bound = 0.0;
  /// Largest gap between consecutive samples of either set.
  double spacing = 0.0;
};

/// Hausdorff distance between the paraboloid ball {phi(x) : |phi(x)| <= r}
/// and the tangent disk of radius r at the vertex, estimated from
/// `samples` points along a meridian of each (both sets are surfaces of
/// revolution, so nearest points share the meridian plane).
TangentBound tangent_bound_check(double kappa, double radius, std::size_t samples);

}  // namespace raden
