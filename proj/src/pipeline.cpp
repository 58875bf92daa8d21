#include "raden/pipeline.hpp"

#include "raden/error.hpp"

namespace raden {

ProjectionGeometry make_geometry(const PixelGrid& grid, const PipelineConfig& config) {
  if (config.transform == RegionKind::ball) return make_ball_geometry(grid, config.ball);
  return make_halfspace_geometry(grid, config.halfspace);
}

PipelineResult estimate_density(const PointCloud& cloud, const PixelGrid& grid, const PipelineConfig& config) {
  require(cloud.dim() == grid.dim(), "cloud and grid dimensions differ");
  const RadonOperator op = RadonOperator::assemble(grid, make_geometry(grid, config), config.assemble);
  return estimate_density(cloud, op, config.reg);
}

PipelineResult estimate_density(const PointCloud& cloud, const RadonOperator& op, const RegConfig& reg) {
  if (cloud.empty()) fail(ErrorCode::degenerate_input, "point cloud is empty");
  const Normalization norm =
      op.weight_mode() == WeightMode::density ? Normalization::per_m : Normalization::raw_counts;
  const MeasurementVector b = measure(cloud, op.geometry(), norm);
  SolveResult solved = solve(op, b, reg, op.grid());
  return PipelineResult{std::move(solved.estimate), std::move(solved.report), op.rows(), op.storage()};
}

}  // namespace raden
