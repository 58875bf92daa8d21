#include "raden/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace raden {

PointCloud embed_paraboloid(const PointCloud& xy, double kappa) {
  require(xy.dim() == 2, "paraboloid embedding needs 2-D input");
  require(std::isfinite(kappa), "kappa must be finite");
  PointCloud out(3);
  out.reserve(xy.size());
  for (std::size_t i = 0; i < xy.size(); ++i) {
    const auto p = xy.point(i);
    const double q[3] = {p[0], p[1], kappa * (p[0] * p[0] + p[1] * p[1]) / 2.0};
    out.push_back(q);
  }
  return out;
}

void PatchConfig::validate() const {
  require(radius > 0.0, "patch radius must be positive");
  require(variance_percent > 0.0 && variance_percent <= 100.0, "variance percentage must lie in (0, 100]");
  require(grid_size >= 3, "patch grid needs at least 3 pixels per axis");
}

PatchResult pca_patch(const PointCloud& cloud, std::span<const double> query, const PatchConfig& config) {
  config.validate();
  const int d = cloud.dim();
  require(d >= kPatchDim, "patches need ambient dimension of at least 2");
  require(query.size() == static_cast<std::size_t>(d), "query dimension does not match the cloud");
  const auto du = static_cast<std::size_t>(d);

  std::vector<std::size_t> members;
  const double r2 = config.radius * config.radius;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    double dist2 = 0.0;
    for (std::size_t a = 0; a < du; ++a) dist2 += (cloud.point(i)[a] - query[a]) * (cloud.point(i)[a] - query[a]);
    if (dist2 <= r2) members.push_back(i);
  }
  if (members.size() < 2)
    fail(ErrorCode::insufficient_neighborhood,
         "ball of radius " + std::to_string(config.radius) + " holds " + std::to_string(members.size()) + " points");

  PatchResult out;
  out.neighborhood_size = members.size();
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(members.size()), d);
  for (std::size_t k = 0; k < members.size(); ++k)
    for (int a = 0; a < d; ++a) pts(static_cast<Eigen::Index>(k), a) = cloud.point(members[k])[static_cast<std::size_t>(a)];
  const Eigen::RowVectorXd mean = pts.colwise().mean();
  const Eigen::MatrixXd centered = pts.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(members.size() - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);

  out.mean.assign(mean.data(), mean.data() + d);
  out.axes.resize(du * du);
  double total = 0.0;
  for (int k = 0; k < d; ++k) {
    const int src = d - 1 - k;  // Eigen sorts ascending
    const double lambda = std::max(0.0, eig.eigenvalues()(src));
    out.eigenvalues.push_back(lambda);
    total += lambda;
    Eigen::VectorXd axis = eig.eigenvectors().col(src);
    Eigen::Index lead = 0;
    axis.cwiseAbs().maxCoeff(&lead);
    if (axis(lead) < 0.0) axis = -axis;
    for (int a = 0; a < d; ++a) out.axes[static_cast<std::size_t>(k) * du + static_cast<std::size_t>(a)] = axis(a);
  }
  if (!(total > 0.0)) fail(ErrorCode::degenerate_patch, "neighbourhood has zero variance");

  const double target = config.variance_percent / 100.0 * total;
  double cumulative = 0.0;
  for (int k = 0; k < d; ++k) {
    cumulative += out.eigenvalues[static_cast<std::size_t>(k)];
    if (cumulative >= target * (1.0 - 1e-12)) {
      out.selected_dim = k + 1;
      break;
    }
  }
  if (out.selected_dim == 0) out.selected_dim = d;
  out.dim_clamped = out.selected_dim != kPatchDim;

  auto project = [&](std::span<const double> x, int k) {
    double acc = 0.0;
    for (std::size_t a = 0; a < du; ++a) acc += out.axes[static_cast<std::size_t>(k) * du + a] * (x[a] - out.mean[a]);
    return acc;
  };
  out.coords.reserve(members.size());
  for (std::size_t i : members) {
    const double u[kPatchDim] = {project(cloud.point(i), 0), project(cloud.point(i), 1)};
    out.coords.push_back(u);
  }
  out.query_coords = {project(query, 0), project(query, 1)};
  return out;
}

PixelGrid patch_grid(const PatchResult& patch, const PatchConfig& config) {
  config.validate();
  double lo[kPatchDim] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  double hi[kPatchDim] = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < patch.coords.size(); ++i)
    for (int a = 0; a < kPatchDim; ++a) {
      lo[a] = std::min(lo[a], patch.coords.point(i)[static_cast<std::size_t>(a)]);
      hi[a] = std::max(hi[a], patch.coords.point(i)[static_cast<std::size_t>(a)]);
    }
  const double extent = std::max(hi[0] - lo[0], hi[1] - lo[1]);
  if (!(extent > 0.0)) fail(ErrorCode::degenerate_patch, "projected neighbourhood has no extent");
  const auto n = config.grid_size;
  const double h = extent / static_cast<double>(n - 2);
  double glo[kPatchDim], ghi[kPatchDim];
  for (int a = 0; a < kPatchDim; ++a) {
    const double c = 0.5 * (lo[a] + hi[a]);
    glo[a] = c - 0.5 * h * static_cast<double>(n);
    ghi[a] = c + 0.5 * h * static_cast<double>(n);
  }
  const std::size_t shape[kPatchDim] = {n, n};
  return PixelGrid::covering(glo, ghi, shape);
}

PatchResult reconstruct_patch(const PointCloud& cloud, std::span<const double> query, const PatchConfig& config,
                              const RegConfig& reg) {
  PatchResult patch = pca_patch(cloud, query, config);
  const PixelGrid grid = patch_grid(patch, config);
  ProjectionGeometry geometry = config.transform == RegionKind::ball
                                    ? ProjectionGeometry(make_ball_geometry(grid, config.ball))
                                    : ProjectionGeometry(make_halfspace_geometry(grid, config.halfspace));
  const RadonOperator op = RadonOperator::assemble(grid, geometry);
  const MeasurementVector b = measure(patch.coords, geometry);
  SolveResult solved = solve(op, b, reg, grid);
  const auto pixel = grid.locate(patch.query_coords);
  patch.value = pixel ? solved.estimate.values[*pixel] : 0.0;
  patch.estimate = std::move(solved.estimate);
  patch.report = std::move(solved.report);
  return patch;
}

std::vector<PatchQuery> patch_density(const PointCloud& cloud, const PointCloud& queries, const PatchConfig& config,
                                      const RegConfig& reg) {
  require(queries.dim() == cloud.dim(), "query dimension does not match the cloud");
  std::vector<PatchQuery> out(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    try {
      out[q].result = reconstruct_patch(cloud, queries.point(q), config, reg);
    } catch (const Error& e) {
      out[q].error = e.code();
      out[q].message = e.what();
    }
  }
  return out;
}

std::vector<double> paraboloid_patch_truth(const DensitySpec& spec, double kappa, const PatchResult& patch,
                                           std::span<const double> query, double radius, const PixelGrid& grid) {
  require(spec.dim == 2 && grid.dim() == kPatchDim, "paraboloid truth needs a planar spec and a 2-D patch grid");
  require(patch.mean.size() == 3 && query.size() == 3, "paraboloid truth needs a 3-D patch");
  const double* e0 = patch.axes.data();
  const double* e1 = patch.axes.data() + 3;
  const double* mu = patch.mean.data();
  // Principal coordinates of phi(x, y) and their Jacobian in (x, y).
  auto coords = [&](double x, double y, double u[2], double jac[2][2]) {
    const double p[3] = {x - mu[0], y - mu[1], kappa * (x * x + y * y) / 2.0 - mu[2]};
    const double dz[2] = {kappa * x, kappa * y};
    const double* axes[2] = {e0, e1};
    for (int k = 0; k < 2; ++k) {
      u[k] = axes[k][0] * p[0] + axes[k][1] * p[1] + axes[k][2] * p[2];
      jac[k][0] = axes[k][0] + axes[k][2] * dz[0];
      jac[k][1] = axes[k][1] + axes[k][2] * dz[1];
    }
  };
  std::vector<double> values(grid.size(), 0.0);
  const double r2 = radius * radius;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(grid.size()); ++i) {
    const auto c = grid.center(static_cast<std::size_t>(i));
    // Linear start: ignore the height term and invert the planar part.
    const double a00 = e0[0], a01 = e0[1], a10 = e1[0], a11 = e1[1];
    const double det0 = a00 * a11 - a01 * a10;
    if (std::abs(det0) < 1e-12) continue;
    const double r0 = c[0] + e0[0] * mu[0] + e0[1] * mu[1] + e0[2] * mu[2];
    const double r1 = c[1] + e1[0] * mu[0] + e1[1] * mu[1] + e1[2] * mu[2];
    double x = (a11 * r0 - a01 * r1) / det0;
    double y = (a00 * r1 - a10 * r0) / det0;
    double u[2], jac[2][2];
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
      coords(x, y, u, jac);
      const double f0 = u[0] - c[0];
      const double f1 = u[1] - c[1];
      if (std::hypot(f0, f1) < 1e-10 * std::max(1.0, std::hypot(c[0], c[1]))) {
        ok = true;
        break;
      }
      const double det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
      if (std::abs(det) < 1e-14) break;
      x -= (jac[1][1] * f0 - jac[0][1] * f1) / det;
      y -= (jac[0][0] * f1 - jac[1][0] * f0) / det;
    }
    if (!ok) continue;
    const double du = c[0] - patch.query_coords[0];
    const double dv = c[1] - patch.query_coords[1];
    if (du * du + dv * dv > r2) continue;
    if (x < spec.domain_lo[0] || x > spec.domain_hi[0] || y < spec.domain_lo[1] || y > spec.domain_hi[1]) continue;
    const double xy[2] = {x, y};
    values[static_cast<std::size_t>(i)] = mixture_pdf(spec, xy);
  }
  return normalize(values, grid).values;
}

TangentBound tangent_bound_check(double kappa, double radius, std::size_t samples) {
  require(kappa >= 0.0, "kappa must be nonnegative");
  require(radius > 0.0, "radius must be positive");
  require(samples >= 2, "need at least two samples per set");
  // rho^2 + (kappa rho^2 / 2)^2 = r^2 at the rim of the paraboloid ball.
  const double rho2 = kappa > 0.0 ? (std::sqrt(1.0 + kappa * kappa * radius * radius) - 1.0) * 2.0 / (kappa * kappa)
                                   : radius * radius;
  const double rho_max = std::sqrt(rho2);
  const double last = static_cast<double>(samples - 1);
  std::vector<double> mx(samples), mz(samples), tx(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    mx[i] = rho_max * static_cast<double>(i) / last;
    mz[i] = kappa * mx[i] * mx[i] / 2.0;
    tx[i] = radius * static_cast<double>(i) / last;
  }
  TangentBound out;
  out.bound = 0.5 * kappa * radius * radius;
  for (std::size_t i = 1; i < samples; ++i) {
    out.spacing = std::max(out.spacing, std::hypot(mx[i] - mx[i - 1], mz[i] - mz[i - 1]));
    out.spacing = std::max(out.spacing, tx[i] - tx[i - 1]);
  }
  double to_tangent = 0.0;
  double to_manifold = 0.0;
#pragma omp parallel for schedule(static) reduction(max : to_tangent, to_manifold)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(samples); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    double best_t = std::numeric_limits<double>::infinity();
    double best_m = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < samples; ++j) {
      best_t = std::min(best_t, std::hypot(mx[ui] - tx[j], mz[ui]));
      best_m = std::min(best_m, std::hypot(tx[ui] - mx[j], mz[j]));
    }
    to_tangent = std::max(to_tangent, best_t);
    to_manifold = std::max(to_manifold, best_m);
  }
  out.estimate = std::max(to_tangent, to_manifold);
  return out;
}

}  // namespace raden
