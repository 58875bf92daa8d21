#pragma once

#include "raden/grid.hpp"
#include "raden/pointcloud.hpp"
#include "raden/projection.hpp"
#include "raden/radon_operator.hpp"
#include "raden/solver.hpp"

namespace raden {

struct PipelineConfig {
  RegionKind transform = RegionKind::ball;
  HalfSpaceGeometryConfig halfspace;
  BallGeometryConfig ball;
  AssembleOptions assemble;
  RegConfig reg;
};

struct PipelineResult {
  DensityEstimate estimate;
  SolveReport report;
  std::size_t rows = 0;
  Storage storage = Storage::matrix_free;
};

ProjectionGeometry make_geometry(const PixelGrid& grid, const PipelineConfig& config);

/// Count observations per region, assemble R over the grid and
/// solve the regularized least-squares problem. Density weighting pairs with
/// per-m data, paper-literal weighting with raw counts.
PipelineResult estimate_density(const PointCloud& cloud, const PixelGrid& grid, const PipelineConfig& config = {});

/// Same, reusing an assembled operator (its geometry and grid).
PipelineResult estimate_density(const PointCloud& cloud, const RadonOperator& op, const RegConfig& reg);

}  // namespace raden
