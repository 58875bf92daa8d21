#include "raden/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "raden/error.hpp"

namespace raden::kernels {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr std::size_t kBlock = 2048;

}  // namespace

std::vector<double> count_rows_reference(const PointCloud& cloud, const ProjectionGeometry& geometry) {
  const std::size_t n = static_cast<std::size_t>(cloud.dim());
  return std::visit(
      Overloaded{
          [&](const HalfSpaceSet& hs) {
            std::vector<double> out(hs.rows(), 0.0);
            for (std::size_t row = 0; row < hs.rows(); ++row) {
              const auto theta = hs.direction(row / hs.offsets.size());
              const double s = hs.offsets[row % hs.offsets.size()];
              for (std::size_t i = 0; i < cloud.size(); ++i) {
                const auto x = cloud.point(i);
                double proj = 0.0;
                for (std::size_t a = 0; a < n; ++a) proj += (x[a] - hs.origin_coord(static_cast<int>(a))) * theta[a];
                if (proj <= s) out[row] += 1.0;
              }
            }
            return out;
          },
          [&](const BallSet& bs) {
            std::vector<double> out(bs.rows(), 0.0);
            for (std::size_t row = 0; row < bs.rows(); ++row) {
              const auto c = bs.center(row / bs.radii.size());
              const double s = bs.radii[row % bs.radii.size()];
              for (std::size_t i = 0; i < cloud.size(); ++i) {
                const auto x = cloud.point(i);
                double sq = 0.0;
                for (std::size_t a = 0; a < n; ++a) {
                  const double d = x[a] - c[a];
                  sq += d * d;
                }
                if (sq <= s * s) out[row] += 1.0;
              }
            }
            return out;
          },
      },
      geometry);
}

std::vector<double> count_rows(const PointCloud& cloud, const ProjectionGeometry& geometry) {
  const std::size_t n = static_cast<std::size_t>(cloud.dim());
  const std::size_t m = cloud.size();
  return std::visit(
      Overloaded{
          [&](const HalfSpaceSet& hs) {
            const std::size_t S = hs.offsets.size();
            std::vector<double> out(hs.rows(), 0.0);
            const auto K = static_cast<std::ptrdiff_t>(hs.direction_count());
#pragma omp parallel
            {
              std::vector<std::size_t> bucket(S + 1);
#pragma omp for schedule(static)
              for (std::ptrdiff_t k = 0; k < K; ++k) {
                const auto theta = hs.direction(static_cast<std::size_t>(k));
                std::fill(bucket.begin(), bucket.end(), 0);
                for (std::size_t i = 0; i < m; ++i) {
                  const auto x = cloud.point(i);
                  double proj = 0.0;
                  for (std::size_t a = 0; a < n; ++a) proj += (x[a] - hs.origin_coord(static_cast<int>(a))) * theta[a];
                  // First offset with proj <= s; the point lies in that row and all later ones.
                  const auto first = std::lower_bound(hs.offsets.begin(), hs.offsets.end(), proj) - hs.offsets.begin();
                  ++bucket[static_cast<std::size_t>(first)];
                }
                std::size_t running = 0;
                double* row = out.data() + static_cast<std::size_t>(k) * S;
                for (std::size_t i = 0; i < S; ++i) {
                  running += bucket[i];
                  row[i] = static_cast<double>(running);
                }
              }
            }
            return out;
          },
          [&](const BallSet& bs) {
            const std::size_t R = bs.radii.size();
            std::vector<double> out(bs.rows(), 0.0);
            std::vector<double> r2(R);
            for (std::size_t i = 0; i < R; ++i) r2[i] = bs.radii[i] * bs.radii[i];
            const double outer = R ? r2.back() : -1.0;
            const auto J = static_cast<std::ptrdiff_t>(bs.center_count());
#pragma omp parallel
            {
              std::vector<std::size_t> bucket(R + 1);
#pragma omp for schedule(static)
              for (std::ptrdiff_t j = 0; j < J; ++j) {
                const auto c = bs.center(static_cast<std::size_t>(j));
                std::fill(bucket.begin(), bucket.end(), 0);
                for (std::size_t i = 0; i < m; ++i) {
                  const auto x = cloud.point(i);
                  double sq = 0.0;
                  for (std::size_t a = 0; a < n; ++a) {
                    const double d = x[a] - c[a];
                    sq += d * d;
                  }
                  if (!(sq <= outer)) continue;
                  const auto first = std::lower_bound(r2.begin(), r2.end(), sq) - r2.begin();
                  ++bucket[static_cast<std::size_t>(first)];
                }
                std::size_t running = 0;
                double* row = out.data() + static_cast<std::size_t>(j) * R;
                for (std::size_t i = 0; i < R; ++i) {
                  running += bucket[i];
                  row[i] = static_cast<double>(running);
                }
              }
            }
            return out;
          },
      },
      geometry);
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  const std::size_t blocks = (a.size() + kBlock - 1) / kBlock;
  if (blocks <= 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t blk = 0; blk < static_cast<std::ptrdiff_t>(blocks); ++blk) {
    const std::size_t lo = static_cast<std::size_t>(blk) * kBlock;
    const std::size_t hi = std::min(a.size(), lo + kBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    partial[static_cast<std::size_t>(blk)] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double norm_sq(std::span<const double> a) { return dot(a, a); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "axpy: length mismatch");
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(x.size()); ++i)
    y[static_cast<std::size_t>(i)] += alpha * x[static_cast<std::size_t>(i)];
}

std::vector<double> kde_grid_reference(const PointCloud& cloud, const PixelGrid& grid, std::span<const double> bandwidth) {
  const auto n = static_cast<std::size_t>(grid.dim());
  std::vector<double> out(grid.size(), 0.0);
  double norm = 1.0;
  for (std::size_t a = 0; a < n; ++a) norm *= std::sqrt(2.0 * std::numbers::pi) * bandwidth[a];
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto c = grid.center(p);
    double acc = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const auto x = cloud.point(i);
      double expo = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        const double t = (c[a] - x[a]) / bandwidth[a];
        expo += t * t;
      }
      acc += std::exp(-0.5 * expo);
    }
    out[p] = acc / (norm * static_cast<double>(cloud.size()));
  }
  return out;
}

std::vector<double> kde_grid(const PointCloud& cloud, const PixelGrid& grid, std::span<const double> bandwidth) {
  const auto n = static_cast<std::size_t>(grid.dim());
  const std::size_t m = cloud.size();
  // Per-axis kernel factors: factor[a][k * m + i] for grid coordinate k.
  std::vector<std::vector<double>> factor(n);
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t len = grid.shape()[a];
    const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * bandwidth[a]);
    factor[a].resize(len * m);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(len); ++k) {
      const double c = grid.center_coord(static_cast<int>(a), static_cast<std::size_t>(k));
      for (std::size_t i = 0; i < m; ++i) {
        const double t = (c - cloud.point(i)[a]) / bandwidth[a];
        factor[a][static_cast<std::size_t>(k) * m + i] = norm * std::exp(-0.5 * t * t);
      }
    }
  }
  std::vector<double> out(grid.size(), 0.0);
  const double inv_m = 1.0 / static_cast<double>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(grid.size()); ++p) {
    const auto idx = grid.unravel(static_cast<std::size_t>(p));
    const double* f0 = factor[0].data() + idx[0] * m;
    const double* f1 = n > 1 ? factor[1].data() + idx[1] * m : nullptr;
    const double* f2 = n > 2 ? factor[2].data() + idx[2] * m : nullptr;
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double v = f0[i];
      if (f1) v *= f1[i];
      if (f2) v *= f2[i];
      acc += v;
    }
    out[static_cast<std::size_t>(p)] = acc * inv_m;
  }
  return out;
}

}  // namespace raden::kernels
