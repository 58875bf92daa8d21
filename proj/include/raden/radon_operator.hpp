#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "raden/grid.hpp"
#include "raden/projection.hpp"

namespace raden {

/// Linear map driven only through forward and adjoint products; this is all
/// the iterative solvers need.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  virtual void apply(std::span<const double> v, std::span<double> out) const = 0;
  virtual void adjoint(std::span<const double> u, std::span<double> out) const = 0;
  /// diag(A^T A), used for Jacobi preconditioning.
  virtual std::vector<double> normal_diagonal() const = 0;

  std::vector<double> apply(std::span<const double> v) const;
  std::vector<double> adjoint(std::span<const double> u) const;
};

enum class RegionKind { half_space, ball };
enum class Storage { automatic, explicit_sparse, matrix_free };

/// `density`: entries equal the pixel volume so R v is the mass of v in each
/// region. `paper_literal`: entries equal one (pair with raw counts).
enum class WeightMode { density, paper_literal };

std::string_view to_string(RegionKind kind);
std::string_view to_string(Storage storage);
std::string_view to_string(WeightMode mode);

struct AssembleOptions {
  Storage storage = Storage::automatic;
  WeightMode weight_mode = WeightMode::density;
  std::size_t nonzero_budget = 150'000'000;
};

/// Binary membership pattern in compressed-row form.
struct SparsePattern {
  std::vector<std::uint64_t> row_ptr;
  std::vector<std::uint32_t> col;
};

/// R_ji = w if pixel center p_i lies in region j, else 0.
class RadonOperator final : public LinearOperator {
 public:
  static RadonOperator assemble(const PixelGrid& grid, const ProjectionGeometry& geometry,
                                const AssembleOptions& options = {});

  std::size_t rows() const override { return rows_; }
  std::size_t cols() const override { return grid_.size(); }
  void apply(std::span<const double> v, std::span<double> out) const override;
  void adjoint(std::span<const double> u, std::span<double> out) const override;
  std::vector<double> normal_diagonal() const override;
  using LinearOperator::adjoint;
  using LinearOperator::apply;

  RegionKind kind() const { return kind_; }
  Storage storage() const { return storage_; }
  WeightMode weight_mode() const { return weight_mode_; }
  double weight() const { return weight_; }
  const PixelGrid& grid() const { return grid_; }
  const ProjectionGeometry& geometry() const { return geometry_; }

  /// Membership predicate used during assembly.
  bool contains(std::size_t row, std::size_t pixel) const;
  /// Dense 0/1 membership row.
  std::vector<double> row_pattern(std::size_t row) const;
  /// Explicit storage only; nullptr for matrix-free operators.
  const SparsePattern* pattern() const { return storage_ == Storage::explicit_sparse ? &csr_ : nullptr; }
  std::size_t nonzeros() const;

 private:
  RadonOperator(const PixelGrid& grid, const ProjectionGeometry& geometry) : grid_(grid), geometry_(geometry) {}

  void build_halfspace_plan();
  void build_ball_plan();
  void build_explicit(std::size_t budget);
  std::size_t row_nonzeros(std::size_t row) const;
  template <class Fn>
  void for_each_in_row(std::size_t row, Fn&& fn) const;

  void ball_disk_sums(std::span<const double> image, std::size_t radius_index, std::span<double> out,
                      std::size_t out_stride, std::size_t out_offset, bool accumulate) const;

  PixelGrid grid_;
  ProjectionGeometry geometry_;
  std::size_t rows_ = 0;
  RegionKind kind_ = RegionKind::half_space;
  Storage storage_ = Storage::matrix_free;
  WeightMode weight_mode_ = WeightMode::density;
  double weight_ = 1.0;

  // Half spaces: index of the first offset whose half space holds each pixel,
  // laid out direction-major (k * cols + pixel).
  std::vector<std::uint32_t> first_offset_;
  // Grid-centered balls: half_width_[r][dy + reach_[r]] is the largest pixel
  // offset |dx| inside radius r on row offset dy, or -1 when the row misses.
  std::vector<std::vector<int>> half_width_;
  std::vector<int> reach_;
  bool ball_on_grid_ = false;

  SparsePattern csr_;
  SparsePattern csc_;
};

}  // namespace raden
