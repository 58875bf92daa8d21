#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "raden/error.hpp"
#include "raden/experiments.hpp"
#include "raden/manifold.hpp"
#include "support.hpp"

using namespace raden;

namespace {

PointCloud rotate(const PointCloud& cloud, double a, double b) {
  // Rotation about z by a, then about x by b.
  PointCloud out(3);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    const double x = std::cos(a) * p[0] - std::sin(a) * p[1];
    const double y = std::sin(a) * p[0] + std::cos(a) * p[1];
    const double q[3] = {x, std::cos(b) * y - std::sin(b) * p[2], std::sin(b) * y + std::cos(b) * p[2]};
    out.push_back(q);
  }
  return out;
}

PointCloud tilted_plane(std::size_t m, CounterRng rng) {
  PointCloud out(3);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = rng.uniform(-10.0, 10.0), v = rng.uniform(-5.0, 5.0);
    const double p[3] = {u + 0.5 * v, 0.3 * u - v, 0.2 * u + 0.7 * v};
    out.push_back(p);
  }
  return out;
}

std::size_t count_within(const PointCloud& cloud, double r) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    if (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= r * r) ++n;
  }
  return n;
}

const double kOrigin[3] = {0.0, 0.0, 0.0};

}  // namespace

TEST_SUITE("manifold") {
  TEST_CASE("paraboloid embedding examples") {
    PointCloud xy(2);
    const double a[2] = {0.0, 0.0}, b[2] = {10.0, 10.0};
    xy.push_back(a);
    xy.push_back(b);
    const PointCloud e = embed_paraboloid(xy, 0.05);
    CHECK(e.dim() == 3);
    CHECK(e.point(0)[2] == 0.0);
    CHECK(e.point(1)[0] == 10.0);
    CHECK(e.point(1)[1] == 10.0);
    CHECK(e.point(1)[2] == doctest::Approx(5.0).epsilon(1e-14));
    const PointCloud flat = embed_paraboloid(test::uniform_cloud(50, -5.0, 5.0, CounterRng(1)), 0.0);
    for (std::size_t i = 0; i < flat.size(); ++i) CHECK(flat.point(i)[2] == 0.0);
    CHECK_THROWS_AS(embed_paraboloid(PointCloud(3), 0.1), Error);
  }

  TEST_CASE("flat data selects two dimensions with a null third eigenvalue") {
    const PointCloud cloud = tilted_plane(400, CounterRng(2));
    PatchConfig cfg;
    cfg.radius = 100.0;
    const PatchResult p = pca_patch(cloud, kOrigin, cfg);
    CHECK(p.selected_dim == 2);
    REQUIRE(p.eigenvalues.size() == 3);
    CHECK(std::abs(p.eigenvalues[2]) <= 1e-10);
    CHECK(p.eigenvalues[0] >= p.eigenvalues[1]);
    CHECK(p.eigenvalues[1] >= p.eigenvalues[2]);
    CHECK(p.neighborhood_size == 400);
  }

  TEST_CASE("eigenvalues scale quadratically with the cloud") {
    const PointCloud base = embed_paraboloid(test::uniform_cloud(500, -20.0, 20.0, CounterRng(3)), 0.05);
    PatchConfig cfg;
    cfg.radius = 15.0;
    const PatchResult p = pca_patch(base, kOrigin, cfg);
    const double c = 2.5;
    std::vector<double> coords = base.coords();
    for (double& x : coords) x *= c;
    PatchConfig scaled = cfg;
    scaled.radius = c * cfg.radius;
    const PatchResult q = pca_patch(PointCloud(3, coords), kOrigin, scaled);
    CHECK(q.neighborhood_size == p.neighborhood_size);
    CHECK(q.selected_dim == p.selected_dim);
    for (std::size_t k = 0; k < 3; ++k) CHECK(q.eigenvalues[k] == doctest::Approx(c * c * p.eigenvalues[k]).epsilon(1e-9));
  }

  TEST_CASE("pca patch is rotation invariant") {
    const PointCloud base = embed_paraboloid(test::uniform_cloud(800, -25.0, 25.0, CounterRng(4)), 0.05);
    PatchConfig cfg;
    cfg.radius = 12.0;
    const PatchResult p = pca_patch(base, kOrigin, cfg);
    const PatchResult q = pca_patch(rotate(base, 0.7, -1.2), kOrigin, cfg);
    CHECK(q.selected_dim == p.selected_dim);
    CHECK(q.neighborhood_size == p.neighborhood_size);
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(q.eigenvalues[k] - p.eigenvalues[k]) <= 1e-8 * p.eigenvalues[0]);
  }

  TEST_CASE("selected dimension is minimal for the variance threshold") {
    const PointCloud base = embed_paraboloid(test::uniform_cloud(800, -25.0, 25.0, CounterRng(5)), 0.05);
    for (double pct : {30.0, 60.0, 90.0, 99.9, 100.0}) {
      PatchConfig cfg;
      cfg.radius = 20.0;
      cfg.variance_percent = pct;
      const PatchResult p = pca_patch(base, kOrigin, cfg);
      double total = 0.0;
      for (double e : p.eigenvalues) total += e;
      double cum = 0.0;
      for (int k = 0; k < p.selected_dim; ++k) cum += p.eigenvalues[static_cast<std::size_t>(k)];
      CHECK(cum >= pct / 100.0 * total * (1.0 - 1e-12));
      if (p.selected_dim > 1) CHECK(cum - p.eigenvalues[static_cast<std::size_t>(p.selected_dim - 1)] < pct / 100.0 * total);
    }
  }

  TEST_CASE("insufficient neighbourhoods are reported per query") {
    const PointCloud base = embed_paraboloid(test::uniform_cloud(200, -10.0, 10.0, CounterRng(6)), 0.01);
    PatchConfig cfg;
    cfg.radius = 5.0;
    const double far[3] = {100.0, 100.0, 0.0};
    try {
      pca_patch(base, far, cfg);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::insufficient_neighborhood);
    }
    PointCloud queries(3);
    queries.push_back(far);
    const auto out = patch_density(base, queries, cfg, RegConfig{});
    REQUIRE(out.size() == 1);
    CHECK_FALSE(out[0].result.has_value());
    CHECK(out[0].error == ErrorCode::insufficient_neighborhood);
    PatchConfig bad = cfg;
    bad.variance_percent = 0.0;
    CHECK_THROWS_AS(pca_patch(base, kOrigin, bad), Error);
  }

  TEST_CASE("flat uniform patch recovers the constant within 25%") {
    DensitySpec spec;
    spec.domain_lo = {-25.0, -25.0};
    spec.domain_hi = {25.0, 25.0};
    spec.components = {{1.0, UniformComponent{{-25.0, -25.0}, {25.0, 25.0}}}};
    const PointCloud cloud = embed_paraboloid(sample_density(spec, 5000, 7), 0.0);
    PatchConfig cfg;
    cfg.radius = 20.0;
    const PatchResult p = reconstruct_patch(cloud, kOrigin, cfg, RegConfig{});
    const double constant = 1.0 / (std::numbers::pi * cfg.radius * cfg.radius);
    CHECK(p.selected_dim == 2);
    CHECK(std::abs(p.value - constant) <= 0.25 * constant);
  }

  TEST_CASE("curved patch of the table density selects two dimensions") {
    const PointCloud xy = sample_density(manifold_density(CounterRng(8)), 5000, 9);
    PatchConfig cfg;
    cfg.radius = 20.0;
    cfg.variance_percent = 90.0;
    CHECK(pca_patch(embed_paraboloid(xy, 0.05), kOrigin, cfg).selected_dim == 2);
  }

  TEST_CASE("neighbourhood size grows 10 to 25 fold from r=5 to r=20") {
    // Pooled over mixture draws: a single draw can put few points near the vertex.
    std::size_t small = 0, large = 0;
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
      const CounterRng rng = CounterRng(10).substream(trial);
      const PointCloud cloud = embed_paraboloid(sample_density(manifold_density(rng.substream(0)), 5000, rng.substream(1)), 0.01);
      small += count_within(cloud, 5.0);
      large += count_within(cloud, 20.0);
    }
    const double ratio = static_cast<double>(large) / static_cast<double>(small);
    MESSAGE("pooled neighbourhood ratio " << ratio);
    CHECK(ratio >= 10.0);
    CHECK(ratio <= 25.0);
  }

  TEST_CASE("tangent bound examples") {
    const TangentBound flat = tangent_bound_check(0.0, 10.0, 2001);
    CHECK(flat.estimate <= 1e-12);
    const TangentBound b = tangent_bound_check(0.05, 10.0, 2001);
    CHECK(b.bound == doctest::Approx(2.5));
    CHECK(b.estimate <= b.bound + 2.0 * b.spacing);
    CHECK(b.estimate > 0.0);
    CHECK_THROWS_AS(tangent_bound_check(-1.0, 1.0, 10), Error);
    CHECK_THROWS_AS(tangent_bound_check(0.1, 0.0, 10), Error);
  }

  TEST_CASE("tangent distance is nondecreasing in r") {
    for (double kappa : {0.01, 0.05, 0.1}) {
      double previous = 0.0;
      for (double r = 1.0; r <= 25.0; r += 2.0) {
        const TangentBound b = tangent_bound_check(kappa, r, 1001);
        CHECK(b.estimate >= previous - b.spacing);
        previous = b.estimate;
      }
    }
  }
}
