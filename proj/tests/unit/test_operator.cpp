#include <cmath>

#include "doctest.h"
#include "raden/error.hpp"
#include "raden/kernels.hpp"
#include "raden/radon_operator.hpp"
#include "support.hpp"

using namespace raden;

namespace {

PixelGrid square(double extent, std::size_t n) {
  const double lo[2] = {0.0, 0.0}, hi[2] = {extent, extent};
  const std::size_t shape[2] = {n, n};
  return PixelGrid::covering(lo, hi, shape);
}

bool matrix_free_ok(const ProjectionGeometry& g) {
  const auto* balls = std::get_if<BallSet>(&g);
  return !balls || balls->center_grid.has_value();
}

RadonOperator build(const PixelGrid& grid, const ProjectionGeometry& g, Storage storage,
                    WeightMode mode = WeightMode::density) {
  AssembleOptions options;
  options.storage = storage;
  options.weight_mode = mode;
  return RadonOperator::assemble(grid, g, options);
}

std::vector<double> random_vector(std::size_t n, CounterRng rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<ProjectionGeometry> test_geometries(const PixelGrid& grid) {
  HalfSpaceGeometryConfig hc;
  hc.directions = 24;
  hc.offsets = 31;
  BallGeometryConfig bc;
  bc.min_radius = 1.0;
  bc.max_radius = 6.0;
  bc.radius_step = 0.5;
  BallSet off_grid;
  CounterRng rng(3);
  for (int j = 0; j < 40; ++j) {
    off_grid.centers.push_back(rng.uniform(0.0, 30.0));
    off_grid.centers.push_back(rng.uniform(0.0, 30.0));
  }
  off_grid.radii = {1.5, 3.0, 7.25};
  return {make_halfspace_geometry(grid, hc), make_ball_geometry(grid, bc), off_grid};
}

}  // namespace

TEST_SUITE("operator") {
  TEST_CASE("2x2 unit grid patterns") {
    const PixelGrid grid = square(2.0, 2);
    HalfSpaceSet hs;
    hs.directions = {0.0, 1.0};
    hs.offsets = {-1.0, 1.0};
    const RadonOperator h = build(grid, hs, Storage::explicit_sparse, WeightMode::paper_literal);
    CHECK(h.row_pattern(1) == std::vector<double>{1, 1, 0, 0});
    CHECK(h.row_pattern(0) == std::vector<double>{0, 0, 0, 0});
    BallSet ball;
    ball.centers = {0.5, 0.5};
    ball.radii = {0.1};
    const RadonOperator b = build(grid, ball, Storage::explicit_sparse, WeightMode::paper_literal);
    CHECK(b.row_pattern(0) == std::vector<double>{1, 0, 0, 0});
  }

  TEST_CASE("apply and adjoint on unit vectors") {
    const PixelGrid grid = square(30.0, 30);
    for (const auto& g : test_geometries(grid))
      for (Storage storage : {Storage::explicit_sparse, Storage::matrix_free}) {
        if (storage == Storage::matrix_free && !matrix_free_ok(g)) continue;
        const RadonOperator op = build(grid, g, storage);
        const double w = op.weight();
        CHECK(w == doctest::Approx(grid.pixel_volume()));
        const std::vector<double> ones(grid.size(), 1.0);
        const auto sums = op.apply(ones);
        for (std::size_t row = 0; row < op.rows(); row += 7) {
          const auto pattern = op.row_pattern(row);
          double k = 0.0;
          for (double p : pattern) k += p;
          CHECK(sums[row] == doctest::Approx(w * k));
        }
        for (std::size_t pixel : {0ul, 17ul, 465ul, 899ul}) {
          std::vector<double> e(grid.size(), 0.0);
          e[pixel] = 1.0;
          const auto col = op.apply(e);
          for (std::size_t row = 0; row < op.rows(); row += 5) CHECK(col[row] == (op.contains(row, pixel) ? w : 0.0));
        }
        for (std::size_t row : {0ul, op.rows() / 2, op.rows() - 1}) {
          std::vector<double> u(op.rows(), 0.0);
          u[row] = 1.0;
          const auto back = op.adjoint(u);
          const auto pattern = op.row_pattern(row);
          for (std::size_t i = 0; i < grid.size(); ++i) CHECK(back[i] == w * pattern[i]);
        }
        const auto zero = op.adjoint(std::vector<double>(op.rows(), 0.0));
        for (double x : zero) CHECK(x == 0.0);
      }
  }

  TEST_CASE("adjoint identity and storage agreement") {
    const PixelGrid grid = square(30.0, 30);
    CounterRng rng(11);
    for (const auto& g : test_geometries(grid)) {
      const RadonOperator sparse = build(grid, g, Storage::explicit_sparse);
      const RadonOperator free = build(grid, g, matrix_free_ok(g) ? Storage::matrix_free : Storage::explicit_sparse);
      for (int trial = 0; trial < 5; ++trial) {
        const auto v = random_vector(grid.size(), rng.substream(trial));
        const auto u = random_vector(sparse.rows(), rng.substream(100 + trial));
        for (const RadonOperator* op : {&sparse, &free}) {
          const double lhs = dot(op->apply(v), u);
          const double rhs = dot(v, op->adjoint(u));
          CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(std::abs(lhs), 1e-300));
        }
        CHECK(test::rel_diff(free.apply(v), sparse.apply(v)) <= 1e-10);
        CHECK(test::rel_diff(free.adjoint(u), sparse.adjoint(u)) <= 1e-10);
      }
      CHECK(test::rel_diff(free.normal_diagonal(), sparse.normal_diagonal()) <= 1e-12);
    }
  }

  TEST_CASE("membership pattern matches the brute-force oracle") {
    const PixelGrid grid = square(30.0, 30);
    CounterRng rng(5);
    for (const auto& g : test_geometries(grid))
      for (Storage storage : {Storage::explicit_sparse, Storage::matrix_free}) {
        if (storage == Storage::matrix_free && !matrix_free_ok(g)) continue;
        const RadonOperator op = build(grid, g, storage, WeightMode::paper_literal);
        for (int k = 0; k < 1000; ++k) {
          const std::size_t row = rng.below(op.rows()), pixel = rng.below(grid.size());
          const auto c = grid.center(pixel);
          const double x[2] = {c[0], c[1]};
          CHECK(op.contains(row, pixel) == test::in_region(g, row, x));
        }
        if (const SparsePattern* csr = op.pattern()) {
          for (std::size_t row = 0; row < op.rows(); row += 13) {
            std::vector<double> dense(grid.size(), 0.0);
            for (auto k = csr->row_ptr[row]; k < csr->row_ptr[row + 1]; ++k) dense[csr->col[k]] = 1.0;
            CHECK(dense == op.row_pattern(row));
          }
        }
      }
  }

  TEST_CASE("histogram forward consistency with measure") {
    const PixelGrid grid = square(30.0, 30);
    // Points placed exactly at pixel centers so region membership matches the centre rule.
    CounterRng rng(19);
    PointCloud cloud(2);
    for (int i = 0; i < 400; ++i) {
      const auto c = grid.center(rng.below(grid.size()));
      const double p[2] = {c[0], c[1]};
      cloud.push_back(p);
    }
    for (const auto& g : test_geometries(grid)) {
      const RadonOperator op = build(grid, g, matrix_free_ok(g) ? Storage::matrix_free : Storage::automatic);
      std::vector<double> v(grid.size(), 0.0);
      const double m = static_cast<double>(cloud.size());
      for (std::size_t i = 0; i < cloud.size(); ++i) v[*grid.locate(cloud.point(i))] += 1.0 / (m * grid.pixel_volume());
      const auto rv = op.apply(v);
      const auto counts = measure(cloud, g, Normalization::raw_counts).values;
      for (std::size_t row = 0; row < op.rows(); ++row)
        CHECK(std::round(rv[row] * m * grid.pixel_volume() / op.weight()) == counts[row]);
    }
  }

  TEST_CASE("assembly errors") {
    const PixelGrid grid = square(30.0, 30);
    AssembleOptions tight;
    tight.storage = Storage::explicit_sparse;
    tight.nonzero_budget = 1000;
    try {
      RadonOperator::assemble(grid, make_ball_geometry(grid), tight);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::capacity);
    }
    BallSet b3;
    b3.dim = 3;
    b3.centers = {0.0, 0.0, 0.0};
    b3.radii = {1.0};
    CHECK_THROWS_AS(RadonOperator::assemble(grid, b3), Error);
    BallSet loose;
    loose.centers = {3.2, 4.1};
    loose.radii = {2.0};
    CHECK_THROWS_AS(build(grid, loose, Storage::matrix_free), Error);
  }

  TEST_CASE("default storage choices") {
    const PixelGrid grid = square(100.0, 100);
    CHECK(RadonOperator::assemble(grid, make_halfspace_geometry(grid)).storage() == Storage::matrix_free);
    CHECK(RadonOperator::assemble(grid, make_ball_geometry(grid)).rows() == 170000);
  }

  TEST_CASE("deterministic dot is thread-count independent") {
    const auto a = random_vector(100003, CounterRng(1));
    const auto b = random_vector(100003, CounterRng(2));
    const double d = kernels::dot(a, b);
    CHECK(kernels::dot(a, b) == d);
    CHECK(std::abs(d - dot(a, b)) <= 1e-10);
  }
}
