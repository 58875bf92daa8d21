#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "raden/grid.hpp"
#include "raden/pointcloud.hpp"
#include "raden/solver.hpp"

namespace raden {

struct KdeConfig {
  /// Fixed per-axis bandwidth; empty selects the rule of thumb.
  std::optional<double> bandwidth;
  /// c in h_k = c * sigma_k * m^(-1/(n+4)).
  double rule_constant = 1.0;
};

/// Per-axis rule-of-thumb bandwidths. An axis with zero spread (or a single
/// point) falls back to the grid spacing along that axis.
std::vector<double> kde_bandwidth(const PointCloud& cloud, const PixelGrid& grid, const KdeConfig& config = {});

/// Gaussian kernel density estimate at pixel centers, normalized on the grid.
DensityEstimate kde(const PointCloud& cloud, const PixelGrid& grid, const KdeConfig& config = {});

/// sin(pi t) / (pi t), with sinc(0) = 1.
double sinc(double t);

/// g(s) = 1/(m h) sum_i sinc((s - theta . (x_i - origin)) / h). This is the
/// inverse Fourier transform of the empirical characteristic function of the
/// projected sample restricted to |xi| < pi / h, so it integrates to one.
std::vector<double> sinc_projection(const PointCloud& cloud, std::span<const double> theta,
                                    std::span<const double> s_grid, double h, std::span<const double> origin = {});

/// Projections sampled at angles[k] (theta = (cos, sin)) on a shared,
/// uniformly spaced s-grid, measured from `origin`. values is angle-major.
struct Sinogram {
  std::vector<double> angles;
  std::vector<double> s;
  std::vector<double> values;
  std::vector<double> origin{0.0, 0.0};

  std::size_t angle_count() const { return angles.size(); }
  std::span<const double> projection(std::size_t k) const { return {values.data() + k * s.size(), s.size()}; }
};

struct FbpConfig {
  /// Sinc bandwidth in pixel lengths.
  double h = 1.0;
  std::size_t angles = 180;
  /// s-grid step in pixel lengths.
  double s_step = 0.5;
};

/// Symmetric s-grid around zero that covers the grid's circumscribed disk.
std::vector<double> fbp_s_grid(const PixelGrid& grid, const FbpConfig& config = {});

/// Sinc-projection sinogram of a cloud around the grid center.
Sinogram sinc_sinogram(const PointCloud& cloud, const PixelGrid& grid, const FbpConfig& config = {});

/// Ram-Lak (band-limited ramp) filtering followed by linearly interpolated
/// backprojection, scaled by pi / angles. No clipping.
std::vector<double> fbp_backproject(const Sinogram& sinogram, const PixelGrid& grid);

/// fbp_backproject followed by clipping and normalization.
DensityEstimate fbp_reconstruct(const Sinogram& sinogram, const PixelGrid& grid);

/// Sinc projections plus filtered backprojection ("Os").
DensityEstimate os_estimate(const PointCloud& cloud, const PixelGrid& grid, const FbpConfig& config = {});

struct OsSelection {
  DensityEstimate estimate;
  double h = 0.0;
  double error = 0.0;
  std::vector<double> errors;  // one per candidate bandwidth
};

/// Best Os estimate against a known truth over candidate bandwidths.
OsSelection os_best(const PointCloud& cloud, const PixelGrid& grid, std::span<const double> truth,
                    std::span<const double> bandwidths = {}, const FbpConfig& config = {});

}  // namespace raden
