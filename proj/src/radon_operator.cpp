#include "raden/radon_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "raden/error.hpp"

namespace raden {

std::vector<double> LinearOperator::apply(std::span<const double> v) const {
  std::vector<double> out(rows());
  apply(v, out);
  return out;
}

std::vector<double> LinearOperator::adjoint(std::span<const double> u) const {
  std::vector<double> out(cols());
  adjoint(u, out);
  return out;
}

std::string_view to_string(RegionKind kind) { return kind == RegionKind::half_space ? "half-space" : "ball"; }

std::string_view to_string(Storage storage) {
  switch (storage) {
    case Storage::automatic: return "automatic";
    case Storage::explicit_sparse: return "explicit-sparse";
    case Storage::matrix_free: return "matrix-free";
  }
  return "?";
}

std::string_view to_string(WeightMode mode) { return mode == WeightMode::density ? "density" : "paper-literal"; }

namespace {

// Squared length of an integer pixel offset; the single predicate behind
// grid-centered ball membership.
double offset_sq(const PixelGrid& grid, const std::array<std::ptrdiff_t, 3>& d) {
  double sq = 0.0;
  for (int a = 0; a < grid.dim(); ++a) {
    const double t = static_cast<double>(d[static_cast<std::size_t>(a)]) * grid.spacing()[static_cast<std::size_t>(a)];
    sq += t * t;
  }
  return sq;
}

double halfspace_projection(const HalfSpaceSet& hs, std::size_t k, const PixelGrid::Point& p, int dim) {
  const auto theta = hs.direction(k);
  double proj = 0.0;
  for (int a = 0; a < dim; ++a) proj += (p[static_cast<std::size_t>(a)] - hs.origin_coord(a)) * theta[static_cast<std::size_t>(a)];
  return proj;
}

}  // namespace

RadonOperator RadonOperator::assemble(const PixelGrid& grid, const ProjectionGeometry& geometry,
                                      const AssembleOptions& options) {
  require(geometry_dim(geometry) == grid.dim(), "geometry dimension does not match the pixel grid");
  std::visit([](const auto& g) { g.validate(); }, geometry);

  RadonOperator op(grid, geometry);
  op.rows_ = geometry_rows(geometry);
  op.weight_mode_ = options.weight_mode;
  op.weight_ = options.weight_mode == WeightMode::density ? grid.pixel_volume() : 1.0;

  if (const auto* hs = std::get_if<HalfSpaceSet>(&geometry)) {
    op.kind_ = RegionKind::half_space;
    require(hs->offsets.size() < std::numeric_limits<std::uint32_t>::max(), "too many offsets");
    op.storage_ = options.storage == Storage::explicit_sparse ? Storage::explicit_sparse : Storage::matrix_free;
  } else {
    const auto& bs = std::get<BallSet>(geometry);
    op.kind_ = RegionKind::ball;
    op.ball_on_grid_ = bs.center_grid && *bs.center_grid == grid;
    const bool free_ok = op.ball_on_grid_ && grid.dim() == 2;
    if (options.storage == Storage::matrix_free && !free_ok)
      fail(ErrorCode::unsupported, "matrix-free ball operators need 2-D balls centered on the grid's pixel centers");
    op.storage_ = (options.storage == Storage::explicit_sparse || !free_ok) ? Storage::explicit_sparse
                                                                             : Storage::matrix_free;
    if (op.ball_on_grid_) op.build_ball_plan();
  }

  if (op.storage_ == Storage::explicit_sparse) {
    op.build_explicit(options.nonzero_budget);
  } else if (op.kind_ == RegionKind::half_space) {
    op.build_halfspace_plan();
  }
  return op;
}

void RadonOperator::build_halfspace_plan() {
  const auto& hs = std::get<HalfSpaceSet>(geometry_);
  const std::size_t K = hs.direction_count();
  const std::size_t N = grid_.size();
  first_offset_.assign(K * N, 0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(K); ++k) {
    for (std::size_t i = 0; i < N; ++i) {
      const double proj = halfspace_projection(hs, static_cast<std::size_t>(k), grid_.center(i), grid_.dim());
      const auto first = std::lower_bound(hs.offsets.begin(), hs.offsets.end(), proj) - hs.offsets.begin();
      first_offset_[static_cast<std::size_t>(k) * N + i] = static_cast<std::uint32_t>(first);
    }
  }
}

void RadonOperator::build_ball_plan() {
  if (grid_.dim() != 2) return;
  const auto& bs = std::get<BallSet>(geometry_);
  const double hy = grid_.spacing()[1];
  half_width_.assign(bs.radii.size(), {});
  reach_.assign(bs.radii.size(), 0);
  for (std::size_t r = 0; r < bs.radii.size(); ++r) {
    const double s2 = bs.radii[r] * bs.radii[r];
    const int reach = static_cast<int>(std::floor(bs.radii[r] / hy)) + 1;
    reach_[r] = reach;
    auto& table = half_width_[r];
    table.assign(static_cast<std::size_t>(2 * reach + 1), -1);
    for (int dy = -reach; dy <= reach; ++dy) {
      int hw = -1;
      while (offset_sq(grid_, {hw + 1, dy, 0}) <= s2) ++hw;
      table[static_cast<std::size_t>(dy + reach)] = hw;
    }
  }
}

bool RadonOperator::contains(std::size_t row, std::size_t pixel) const {
  require(row < rows_ && pixel < grid_.size(), "membership query out of range");
  if (kind_ == RegionKind::half_space) {
    const auto& hs = std::get<HalfSpaceSet>(geometry_);
    const std::size_t S = hs.offsets.size();
    return halfspace_projection(hs, row / S, grid_.center(pixel), grid_.dim()) <= hs.offsets[row % S];
  }
  const auto& bs = std::get<BallSet>(geometry_);
  const std::size_t R = bs.radii.size();
  const std::size_t j = row / R;
  const double s = bs.radii[row % R];
  if (ball_on_grid_) {
    const auto pi = grid_.unravel(pixel);
    const auto ci = grid_.unravel(j);
    std::array<std::ptrdiff_t, 3> d{};
    for (std::size_t a = 0; a < 3; ++a) d[a] = static_cast<std::ptrdiff_t>(pi[a]) - static_cast<std::ptrdiff_t>(ci[a]);
    return offset_sq(grid_, d) <= s * s;
  }
  const auto p = grid_.center(pixel);
  const auto c = bs.center(j);
  double sq = 0.0;
  for (int a = 0; a < grid_.dim(); ++a) {
    const double t = p[static_cast<std::size_t>(a)] - c[static_cast<std::size_t>(a)];
    sq += t * t;
  }
  return sq <= s * s;
}

template <class Fn>
void RadonOperator::for_each_in_row(std::size_t row, Fn&& fn) const {
  if (kind_ == RegionKind::half_space) {
    for (std::size_t i = 0; i < grid_.size(); ++i)
      if (contains(row, i)) fn(i);
    return;
  }
  const auto& bs = std::get<BallSet>(geometry_);
  const std::size_t R = bs.radii.size();
  const std::size_t j = row / R;
  const double s = bs.radii[row % R];
  const int dim = grid_.dim();
  // Pixel-index bounding box of the ball, padded by one pixel; the exact
  // predicate then decides.
  std::array<std::size_t, 3> lo{0, 0, 0};
  std::array<std::size_t, 3> hi{0, 0, 0};
  const auto c = bs.center(j);
  for (int a = 0; a < dim; ++a) {
    const auto ax = static_cast<std::size_t>(a);
    const double h = grid_.spacing()[ax];
    const double n = static_cast<double>(grid_.shape()[ax]);
    const double first = std::floor((c[ax] - s - grid_.origin()[ax]) / h - 0.5) - 1.0;
    const double last = std::ceil((c[ax] + s - grid_.origin()[ax]) / h - 0.5) + 1.0;
    lo[ax] = static_cast<std::size_t>(std::clamp(first, 0.0, n - 1.0));
    hi[ax] = static_cast<std::size_t>(std::clamp(last, 0.0, n - 1.0));
  }
  PixelGrid::Index idx{0, 0, 0};
  for (idx[2] = lo[2]; idx[2] <= hi[2]; ++idx[2])
    for (idx[1] = lo[1]; idx[1] <= hi[1]; ++idx[1])
      for (idx[0] = lo[0]; idx[0] <= hi[0]; ++idx[0]) {
        const std::size_t pixel = grid_.ravel(idx);
        if (contains(row, pixel)) fn(pixel);
      }
}

std::size_t RadonOperator::row_nonzeros(std::size_t row) const {
  std::size_t count = 0;
  for_each_in_row(row, [&](std::size_t) { ++count; });
  return count;
}

void RadonOperator::build_explicit(std::size_t budget) {
  const std::size_t L = rows_;
  csr_.row_ptr.assign(L + 1, 0);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(L); ++j)
    csr_.row_ptr[static_cast<std::size_t>(j) + 1] = row_nonzeros(static_cast<std::size_t>(j));
  for (std::size_t j = 0; j < L; ++j) csr_.row_ptr[j + 1] += csr_.row_ptr[j];
  const std::size_t nnz = csr_.row_ptr[L];
  if (nnz > budget)
    fail(ErrorCode::capacity, "explicit-sparse operator needs " + std::to_string(nnz) +
                                  " nonzeros, above the budget of " + std::to_string(budget) +
                                  "; use matrix-free storage");
  csr_.col.resize(nnz);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(L); ++j) {
    std::size_t pos = csr_.row_ptr[static_cast<std::size_t>(j)];
    for_each_in_row(static_cast<std::size_t>(j), [&](std::size_t i) { csr_.col[pos++] = static_cast<std::uint32_t>(i); });
  }
  // Transposed copy so the adjoint is a parallel gather in a fixed order.
  const std::size_t N = grid_.size();
  csc_.row_ptr.assign(N + 1, 0);
  for (std::uint32_t i : csr_.col) ++csc_.row_ptr[i + 1];
  for (std::size_t i = 0; i < N; ++i) csc_.row_ptr[i + 1] += csc_.row_ptr[i];
  csc_.col.resize(nnz);
  std::vector<std::uint64_t> cursor(csc_.row_ptr.begin(), csc_.row_ptr.end() - 1);
  for (std::size_t j = 0; j < L; ++j)
    for (std::uint64_t e = csr_.row_ptr[j]; e < csr_.row_ptr[j + 1]; ++e)
      csc_.col[cursor[csr_.col[e]]++] = static_cast<std::uint32_t>(j);
}

std::size_t RadonOperator::nonzeros() const {
  if (storage_ == Storage::explicit_sparse) return csr_.row_ptr.back();
  std::size_t total = 0;
  if (kind_ == RegionKind::half_space) {
    const std::size_t S = std::get<HalfSpaceSet>(geometry_).offsets.size();
    for (std::uint32_t f : first_offset_) total += S - f;
    return total;
  }
  for (std::size_t j = 0; j < rows_; ++j) total += row_nonzeros(j);
  return total;
}

std::vector<double> RadonOperator::row_pattern(std::size_t row) const {
  std::vector<double> out(grid_.size(), 0.0);
  for (std::size_t i = 0; i < grid_.size(); ++i) out[i] = contains(row, i) ? 1.0 : 0.0;
  return out;
}

void RadonOperator::ball_disk_sums(std::span<const double> image, std::size_t r, std::span<double> out,
                                   std::size_t out_stride, std::size_t out_offset, bool accumulate) const {
  // out[p * stride + offset] (+)= w * sum of `image` over the disk of radius r
  // around pixel p, via row prefix sums.
  const std::size_t nx = grid_.shape()[0];
  const std::size_t ny = grid_.shape()[1];
  std::vector<double> prefix(ny * (nx + 1));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t y = 0; y < static_cast<std::ptrdiff_t>(ny); ++y) {
    double* row = prefix.data() + static_cast<std::size_t>(y) * (nx + 1);
    const double* src = image.data() + static_cast<std::size_t>(y) * nx;
    row[0] = 0.0;
    for (std::size_t x = 0; x < nx; ++x) row[x + 1] = row[x] + src[x];
  }
  const auto& table = half_width_[r];
  const std::ptrdiff_t reach = reach_[r];
  const auto nxs = static_cast<std::ptrdiff_t>(nx);
#pragma omp parallel
  {
    std::vector<double> acc(nx);
#pragma omp for schedule(static)
    for (std::ptrdiff_t cy = 0; cy < static_cast<std::ptrdiff_t>(ny); ++cy) {
      std::fill(acc.begin(), acc.end(), 0.0);
      const std::ptrdiff_t ylo = std::max<std::ptrdiff_t>(0, cy - reach);
      const std::ptrdiff_t yhi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(ny) - 1, cy + reach);
      for (std::ptrdiff_t y = ylo; y <= yhi; ++y) {
        const std::ptrdiff_t hw = table[static_cast<std::size_t>(y - cy + reach)];
        if (hw < 0) continue;
        const double* row = prefix.data() + static_cast<std::size_t>(y) * (nx + 1);
        // Span [cx - hw, cx + hw] clipped to [0, nx - 1]; the unclipped
        // middle range is a plain shifted difference.
        const std::ptrdiff_t mid_lo = std::min(hw, nxs);
        const std::ptrdiff_t mid_hi = std::max(mid_lo, nxs - 1 - hw);
        for (std::ptrdiff_t cx = 0; cx < mid_lo; ++cx)
          acc[static_cast<std::size_t>(cx)] += row[std::min(cx + hw, nxs - 1) + 1] - row[0];
        const double* hi_ptr = row + hw + 1;
        const double* lo_ptr = row - hw;
        for (std::ptrdiff_t cx = mid_lo; cx < mid_hi; ++cx)
          acc[static_cast<std::size_t>(cx)] += hi_ptr[cx] - lo_ptr[cx];
        for (std::ptrdiff_t cx = mid_hi; cx < nxs; ++cx)
          acc[static_cast<std::size_t>(cx)] += row[nx] - row[std::max<std::ptrdiff_t>(cx - hw, 0)];
      }
      for (std::size_t cx = 0; cx < nx; ++cx) {
        const std::size_t p = static_cast<std::size_t>(cy) * nx + cx;
        double& slot = out[p * out_stride + out_offset];
        slot = accumulate ? slot + weight_ * acc[cx] : weight_ * acc[cx];
      }
    }
  }
}

void RadonOperator::apply(std::span<const double> v, std::span<double> out) const {
  require(v.size() == cols(), "apply: pixel vector has wrong length");
  require(out.size() == rows_, "apply: output has wrong length");
  if (storage_ == Storage::explicit_sparse) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(rows_); ++j) {
      double acc = 0.0;
      for (std::uint64_t e = csr_.row_ptr[static_cast<std::size_t>(j)]; e < csr_.row_ptr[static_cast<std::size_t>(j) + 1]; ++e)
        acc += v[csr_.col[e]];
      out[static_cast<std::size_t>(j)] = weight_ * acc;
    }
    return;
  }
  if (kind_ == RegionKind::half_space) {
    const auto& hs = std::get<HalfSpaceSet>(geometry_);
    const std::size_t S = hs.offsets.size();
    const std::size_t N = grid_.size();
#pragma omp parallel
    {
      std::vector<double> bucket(S + 1);
#pragma omp for schedule(static)
      for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(hs.direction_count()); ++k) {
        std::fill(bucket.begin(), bucket.end(), 0.0);
        const std::uint32_t* first = first_offset_.data() + static_cast<std::size_t>(k) * N;
        for (std::size_t i = 0; i < N; ++i) bucket[first[i]] += v[i];
        double running = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
          running += bucket[s];
          out[static_cast<std::size_t>(k) * S + s] = weight_ * running;
        }
      }
    }
    return;
  }
  const std::size_t R = std::get<BallSet>(geometry_).radii.size();
  for (std::size_t r = 0; r < R; ++r) ball_disk_sums(v, r, out, R, r, false);
}

void RadonOperator::adjoint(std::span<const double> u, std::span<double> out) const {
  require(u.size() == rows_, "adjoint: measurement vector has wrong length");
  require(out.size() == cols(), "adjoint: output has wrong length");
  if (storage_ == Storage::explicit_sparse) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cols()); ++i) {
      double acc = 0.0;
      for (std::uint64_t e = csc_.row_ptr[static_cast<std::size_t>(i)]; e < csc_.row_ptr[static_cast<std::size_t>(i) + 1]; ++e)
        acc += u[csc_.col[e]];
      out[static_cast<std::size_t>(i)] = weight_ * acc;
    }
    return;
  }
  if (kind_ == RegionKind::half_space) {
    const auto& hs = std::get<HalfSpaceSet>(geometry_);
    const std::size_t S = hs.offsets.size();
    const std::size_t K = hs.direction_count();
    const std::size_t N = grid_.size();
    // suffix[k][s] = sum of u over offsets >= s for direction k.
    std::vector<double> suffix(K * (S + 1));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(K); ++k) {
      double* sfx = suffix.data() + static_cast<std::size_t>(k) * (S + 1);
      sfx[S] = 0.0;
      for (std::size_t s = S; s-- > 0;) sfx[s] = sfx[s + 1] + u[static_cast<std::size_t>(k) * S + s];
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(N); ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < K; ++k)
        acc += suffix[k * (S + 1) + first_offset_[k * N + static_cast<std::size_t>(i)]];
      out[static_cast<std::size_t>(i)] = weight_ * acc;
    }
    return;
  }
  // Grid-centered disks are symmetric, so the adjoint is the same disk-sum
  // operator applied to each radius slice of u, accumulated over radii.
  const std::size_t R = std::get<BallSet>(geometry_).radii.size();
  const std::size_t N = grid_.size();
  std::vector<double> slice(N);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t j = 0; j < N; ++j) slice[j] = u[j * R + r];
    ball_disk_sums(slice, r, out, 1, 0, r > 0);
  }
}

std::vector<double> RadonOperator::normal_diagonal() const {
  // Entries are all w, so diag(R^T R) = w * R^T 1.
  std::vector<double> ones(rows_, 1.0);
  std::vector<double> diag = adjoint(ones);
  for (double& d : diag) d *= weight_;
  return diag;
}

}  // namespace raden
