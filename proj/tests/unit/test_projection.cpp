#include <cmath>
#include <numbers>

#include "doctest.h"
#include "raden/error.hpp"
#include "raden/kernels.hpp"
#include "raden/projection.hpp"
#include "support.hpp"

using namespace raden;

namespace {

PixelGrid grid100() {
  const double lo[2] = {0.0, 0.0}, hi[2] = {100.0, 100.0};
  const std::size_t shape[2] = {100, 100};
  return PixelGrid::covering(lo, hi, shape);
}

PointCloud line_cloud(std::initializer_list<std::array<double, 2>> pts) {
  PointCloud cloud(2);
  for (const auto& p : pts) cloud.push_back(p);
  return cloud;
}

/// Random geometry of either kind with up to ~500 rows.
ProjectionGeometry random_geometry(CounterRng& rng) {
  if (rng.below(2) == 0) {
    HalfSpaceSet hs;
    const std::size_t K = 1 + rng.below(20), S = 1 + rng.below(25);
    for (std::size_t k = 0; k < K; ++k) {
      const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
      hs.directions.push_back(std::cos(a));
      hs.directions.push_back(std::sin(a));
    }
    double s = rng.uniform(-80.0, -40.0);
    for (std::size_t i = 0; i < S; ++i) {
      hs.offsets.push_back(s);
      s += rng.uniform(0.5, 6.0);
    }
    if (rng.below(2)) hs.origin = {rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0)};
    return hs;
  }
  BallSet balls;
  const std::size_t J = 1 + rng.below(25), R = 1 + rng.below(20);
  for (std::size_t j = 0; j < J; ++j) {
    balls.centers.push_back(rng.uniform(0.0, 100.0));
    balls.centers.push_back(rng.uniform(0.0, 100.0));
  }
  double r = rng.uniform(0.5, 5.0);
  for (std::size_t i = 0; i < R; ++i) {
    balls.radii.push_back(r);
    r += rng.uniform(0.5, 5.0);
  }
  return balls;
}

}  // namespace

TEST_SUITE("projection") {
  TEST_CASE("half-space counting examples") {
    const double theta[2] = {1.0, 0.0};
    CHECK(count_half_space(PointCloud(2), 3.0, theta) == 0);
    const PointCloud x = line_cloud({{0, 0}, {1, 0}, {2, 0}});
    CHECK(count_half_space(x, 1.0, theta) == 2);
    CHECK(count_half_space(x, 2.0, theta) == 3);
    const double bad[2] = {1.0, 1.0};
    try {
      count_half_space(x, 1.0, bad);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::validation);
    }
  }

  TEST_CASE("ball counting examples") {
    const PointCloud x = line_cloud({{0, 0}, {3, 4}, {6, 8}});
    const double c[2] = {0.0, 0.0};
    CHECK(count_ball(x, c, 5.0) == 2);
    CHECK(count_ball(x, c, 10.0) == 3);
    const PointCloud y = line_cloud({{0.3, 0.7}, {2.0, 5.0}});
    const double c2[2] = {1.0, 1.0};
    CHECK(count_ball(y, c2, 0.0) == 0);
    CHECK_THROWS_AS(count_ball(x, c, -1.0), Error);
  }

  TEST_CASE("default geometries") {
    const PixelGrid grid = grid100();
    const HalfSpaceSet hs = make_halfspace_geometry(grid);
    CHECK(hs.rows() == 18180);
    for (std::size_t k = 0; k < hs.direction_count(); ++k) {
      const auto t = hs.direction(k);
      CHECK(std::abs(std::hypot(t[0], t[1]) - 1.0) <= 1e-12);
    }
    CHECK(hs.offsets.front() == doctest::Approx(-50.0));
    CHECK(hs.offsets.back() == doctest::Approx(50.0));
    const BallSet balls = make_ball_geometry(grid);
    CHECK(balls.rows() == 170000);
    CHECK(balls.radii.front() == 4.0);
    CHECK(balls.radii.back() == 20.0);
    CHECK(balls.radii.size() == 17);

    HalfSpaceGeometryConfig small;
    small.directions = 1;
    small.offsets = 3;
    const HalfSpaceSet one = make_halfspace_geometry(grid, small);
    CHECK(one.rows() == 3);
    CHECK(one.offsets[0] < one.offsets[1]);

    const double lo[2] = {0.0, 0.0}, hi[2] = {2.0, 2.0};
    const std::size_t shape[2] = {2, 2};
    BallGeometryConfig unit;
    unit.min_radius = unit.max_radius = 1.0;
    CHECK(make_ball_geometry(PixelGrid::covering(lo, hi, shape), unit).rows() == 4);
  }

  TEST_CASE("measure equals the brute-force oracle on random instances") {
    CounterRng rng(2024);
    for (int instance = 0; instance < 200; ++instance) {
      const std::size_t m = rng.below(201);
      const PointCloud cloud = test::uniform_cloud(m, 0.0, 100.0, rng.substream(static_cast<std::uint64_t>(instance)));
      const ProjectionGeometry g = random_geometry(rng);
      const MeasurementVector b = measure(cloud, g, Normalization::raw_counts);
      REQUIRE(b.values.size() == geometry_rows(g));
      for (std::size_t row = 0; row < b.values.size(); ++row) {
        std::size_t count = 0;
        for (std::size_t i = 0; i < m; ++i) count += test::in_region(g, row, cloud.point(i));
        REQUIRE(b.values[row] == static_cast<double>(count));
      }
    }
  }

  TEST_CASE("serial and parallel counting kernels agree") {
    CounterRng rng(77);
    for (int instance = 0; instance < 50; ++instance) {
      const PointCloud cloud = test::uniform_cloud(rng.below(300), 0.0, 100.0, rng.substream(100 + instance));
      const ProjectionGeometry g = random_geometry(rng);
      CHECK(kernels::count_rows(cloud, g) == kernels::count_rows_reference(cloud, g));
    }
  }

  TEST_CASE("per-m normalization and the uniform midline") {
    const PointCloud cloud = test::uniform_cloud(10000, 0.0, 100.0, CounterRng(4));
    HalfSpaceSet hs;
    hs.directions = {1.0, 0.0};
    hs.offsets = {50.0};
    const MeasurementVector b = measure(cloud, hs);
    CHECK(b.m == 10000);
    CHECK(std::abs(b.values[0] - 0.5) < 0.02);
  }

  TEST_CASE("nested regions give nondecreasing measurements") {
    const PixelGrid grid = grid100();
    const PointCloud cloud = test::uniform_cloud(2000, 0.0, 100.0, CounterRng(8));
    HalfSpaceGeometryConfig hc;
    hc.directions = 12;
    const HalfSpaceSet hs = make_halfspace_geometry(grid, hc);
    const auto bh = measure(cloud, hs).values;
    for (std::size_t k = 0; k < hs.direction_count(); ++k)
      for (std::size_t i = 1; i < hs.offsets.size(); ++i)
        CHECK(bh[k * hs.offsets.size() + i] >= bh[k * hs.offsets.size() + i - 1]);
    const double glo[2] = {0.0, 0.0}, ghi[2] = {100.0, 100.0};
    const std::size_t shape[2] = {10, 10};
    const BallSet balls = make_ball_geometry(PixelGrid::covering(glo, ghi, shape));
    const auto bb = measure(cloud, balls).values;
    const std::size_t R = balls.radii.size();
    for (std::size_t j = 0; j < balls.center_count(); ++j)
      for (std::size_t i = 1; i < R; ++i) CHECK(bb[j * R + i] >= bb[j * R + i - 1]);
  }

  TEST_CASE("whole cloud inside a large region") {
    const PointCloud cloud = test::uniform_cloud(300, 0.0, 10.0, CounterRng(1));
    const double theta[2] = {1.0, 0.0};
    CHECK(count_half_space(cloud, 10.0, theta) == 300);
    const double c[2] = {5.0, 5.0};
    CHECK(count_ball(cloud, c, 7.1) == 300);
  }

  TEST_CASE("geometry validation") {
    HalfSpaceSet hs;
    hs.directions = {0.6, 0.8000001};
    hs.offsets = {0.0};
    CHECK_THROWS_AS(hs.validate(), Error);
    hs.directions = {0.6, 0.8};
    hs.offsets = {1.0, 1.0};
    CHECK_THROWS_AS(hs.validate(), Error);
    BallSet balls;
    balls.centers = {0.0, 0.0};
    balls.radii = {-1.0};
    CHECK_THROWS_AS(balls.validate(), Error);
    const PointCloud cloud3(3);
    hs.offsets = {1.0};
    CHECK_THROWS_AS(measure(cloud3, hs), Error);
  }
}
