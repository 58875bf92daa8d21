#pragma once

// Data-parallel inner loops. Every OpenMP kernel has a serial reference
// twin with the plain textbook loop structure; the references back the
// property tests and the benchmark.

#include <cstddef>
#include <span>
#include <vector>

#include "raden/grid.hpp"
#include "raden/pointcloud.hpp"
#include "raden/projection.hpp"

namespace raden::kernels {

/// Row counts by a rows x points double loop.
std::vector<double> count_rows_reference(const PointCloud& cloud, const ProjectionGeometry& geometry);

/// Row counts via per-direction (per-center) sorting and binary search,
/// parallel over directions (centers). Identical output to the reference.
std::vector<double> count_rows(const PointCloud& cloud, const ProjectionGeometry& geometry);

/// Deterministic dot product: fixed-size blocks summed in block order, so
/// the result does not depend on the thread count.
double dot(std::span<const double> a, std::span<const double> b);
double norm_sq(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// Isotropic-per-axis Gaussian KDE at pixel centers (unnormalized mean of
/// kernels). Serial reference evaluates every kernel at every pixel directly.
std::vector<double> kde_grid_reference(const PointCloud& cloud, const PixelGrid& grid, std::span<const double> bandwidth);
std::vector<double> kde_grid(const PointCloud& cloud, const PixelGrid& grid, std::span<const double> bandwidth);

}  // namespace raden::kernels
