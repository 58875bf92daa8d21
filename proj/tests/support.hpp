#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "raden/pointcloud.hpp"
#include "raden/projection.hpp"
#include "raden/radon_operator.hpp"
#include "raden/rng.hpp"

namespace raden::test {

/// Dense row-major matrix wrapped as a LinearOperator.
class DenseOperator final : public LinearOperator {
 public:
  DenseOperator(std::size_t rows, std::size_t cols, std::vector<double> a) : rows_(rows), cols_(cols), a_(std::move(a)) {}

  static DenseOperator identity(std::size_t n) {
    std::vector<double> a(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] = 1.0;
    return {n, n, std::move(a)};
  }

  std::size_t rows() const override { return rows_; }
  std::size_t cols() const override { return cols_; }
  void apply(std::span<const double> v, std::span<double> out) const override {
    for (std::size_t r = 0; r < rows_; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < cols_; ++c) s += a_[r * cols_ + c] * v[c];
      out[r] = s;
    }
  }
  void adjoint(std::span<const double> u, std::span<double> out) const override {
    for (std::size_t c = 0; c < cols_; ++c) out[c] = 0.0;
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out[c] += a_[r * cols_ + c] * u[r];
  }
  std::vector<double> normal_diagonal() const override {
    std::vector<double> d(cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) d[c] += a_[r * cols_ + c] * a_[r * cols_ + c];
    return d;
  }
  using LinearOperator::adjoint;
  using LinearOperator::apply;

 private:
  std::size_t rows_, cols_;
  std::vector<double> a_;
};

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(std::size_t n) : n_(n) {}
  std::size_t rows() const override { return n_; }
  std::size_t cols() const override { return n_; }
  void apply(std::span<const double> v, std::span<double> out) const override { std::copy(v.begin(), v.end(), out.begin()); }
  void adjoint(std::span<const double> u, std::span<double> out) const override { std::copy(u.begin(), u.end(), out.begin()); }
  std::vector<double> normal_diagonal() const override { return std::vector<double>(n_, 1.0); }
  using LinearOperator::adjoint;
  using LinearOperator::apply;

 private:
  std::size_t n_;
};

inline PointCloud uniform_cloud(std::size_t m, double lo, double hi, CounterRng rng, int dim = 2) {
  PointCloud cloud(dim);
  std::vector<double> p(static_cast<std::size_t>(dim));
  for (std::size_t i = 0; i < m; ++i) {
    for (auto& x : p) x = rng.uniform(lo, hi);
    cloud.push_back(p);
  }
  return cloud;
}

/// Brute-force membership of a point in geometry row `row`.
inline bool in_region(const ProjectionGeometry& geometry, std::size_t row, std::span<const double> x) {
  if (const auto* hs = std::get_if<HalfSpaceSet>(&geometry)) {
    const std::size_t k = row / hs->offsets.size(), i = row % hs->offsets.size();
    const auto theta = hs->direction(k);
    double dot = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) dot += (x[a] - hs->origin_coord(static_cast<int>(a))) * theta[a];
    return dot <= hs->offsets[i];
  }
  const auto& balls = std::get<BallSet>(geometry);
  const std::size_t j = row / balls.radii.size(), i = row % balls.radii.size();
  const auto c = balls.center(j);
  double d2 = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) d2 += (x[a] - c[a]) * (x[a] - c[a]);
  return d2 <= balls.radii[i] * balls.radii[i];
}

inline double rel_diff(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace raden::test
