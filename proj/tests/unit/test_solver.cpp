#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "doctest.h"
#include "raden/error.hpp"
#include "raden/pipeline.hpp"
#include "raden/solver.hpp"
#include "support.hpp"

using namespace raden;
using test::DenseOperator;

namespace {

PixelGrid grid2(std::size_t n, double extent) {
  const double lo[2] = {0.0, 0.0}, hi[2] = {extent, extent};
  const std::size_t shape[2] = {n, n};
  return PixelGrid::covering(lo, hi, shape);
}

PixelGrid grid1(std::size_t n) {
  const double origin[1] = {0.0}, spacing[1] = {1.0};
  const std::size_t shape[1] = {n};
  return PixelGrid(origin, spacing, shape);
}

/// Piecewise-constant blocks on an n x n image plus Gaussian noise of sd sigma.
struct NoisyImage {
  std::vector<double> truth;
  std::vector<double> b;
};

NoisyImage noisy_blocks(std::size_t n, double sigma, CounterRng rng) {
  NoisyImage out;
  out.truth.resize(n * n);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      double v = 1.0;
      if (x > n / 4 && x < n / 2 && y > n / 5 && y < 3 * n / 4) v = 3.0;
      if ((x - 3 * n / 4) * (x - 3 * n / 4) + (y - n / 3) * (y - n / 3) < n * n / 36) v = 2.0;
      out.truth[y * n + x] = v;
    }
  out.b = out.truth;
  for (double& x : out.b) x += sigma * rng.normal();
  return out;
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("normalize examples") {
    const PixelGrid two = grid1(2);
    const std::vector<double> in{-1.0, 3.0};
    const auto out = normalize(in, two).values;
    CHECK(out[0] == 0.0);
    CHECK(out[1] == doctest::Approx(1.0));

    const PixelGrid g = grid2(4, 2.0);
    const auto flat = normalize(std::vector<double>(16, 7.0), g).values;
    for (double x : flat) CHECK(x == doctest::Approx(0.25));
    const auto again = normalize(flat, g).values;
    for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(again[i] - flat[i]) <= 1e-12);

    try {
      normalize(std::vector<double>{-1.0, 0.0}, two);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::degenerate_estimate);
    }
  }

  TEST_CASE("identity operator, consistent data, tiny fixed lambda") {
    const PixelGrid g = grid2(8, 8.0);
    std::vector<double> v(g.size());
    CounterRng rng(1);
    for (auto& x : v) x = rng.uniform(0.5, 1.5);
    v = normalize(v, g).values;
    const test::IdentityOperator id(g.size());
    for (Penalty penalty : {Penalty::tikhonov, Penalty::tv}) {
      RegConfig cfg;
      cfg.penalty = penalty;
      cfg.fixed_lambda = 1e-6;
      cfg.max_outer_iters = 30;
      const SolveResult r = solve(id, v, cfg, g);
      CHECK(test::rel_diff(r.estimate.values, v) <= 1e-6);
      CHECK(r.report.selection == "fixed");
    }
  }

  TEST_CASE("smoothed TV gradient matches central differences") {
    const PixelGrid g = grid2(8, 8.0);
    CounterRng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> v(g.size());
      for (auto& x : v) x = rng.uniform(0.0, 1.0);
      const double beta = 0.05;
      const auto grad = smoothed_total_variation_gradient(v, g, beta);
      std::vector<double> fd(g.size());
      const double h = 1e-6;
      for (std::size_t i = 0; i < g.size(); ++i) {
        auto vp = v, vm = v;
        vp[i] += h;
        vm[i] -= h;
        fd[i] = (smoothed_total_variation(vp, g, beta) - smoothed_total_variation(vm, g, beta)) / (2.0 * h);
      }
      CHECK(test::rel_diff(grad, fd) <= 1e-5);
    }
  }

  TEST_CASE("total variation definition") {
    const PixelGrid g = grid2(2, 2.0);
    const std::vector<double> v{0.0, 1.0, 3.0, 7.0};
    // x edges: |1-0| + |7-3|, y edges: |3-0| + |7-1|
    CHECK(total_variation(v, g) == doctest::Approx(14.0));
    CHECK(smoothed_total_variation(v, g, 1e-9) == doctest::Approx(14.0));
  }

  TEST_CASE("TV objective is nonincreasing and data fit grows with lambda") {
    const PixelGrid g = grid2(24, 24.0);
    const NoisyImage img = noisy_blocks(24, 0.3, CounterRng(5));
    const test::IdentityOperator id(g.size());
    RegConfig cfg;
    cfg.selection = Selection::gcv;
    cfg.exhaustive_sweep = true;
    cfg.trace_probes = 5;
    const SolveResult r = solve(id, img.b, cfg, g);
    CHECK(r.report.objective_monotone);
    for (std::size_t i = 1; i < r.report.objective_trace.size(); ++i)
      CHECK(r.report.objective_trace[i] <= r.report.objective_trace[i - 1] * (1.0 + 1e-10));
    REQUIRE(r.report.sweep.size() == RegConfig::default_lambda_factors().size());
    for (std::size_t i = 1; i < r.report.sweep.size(); ++i)
      CHECK(r.report.sweep[i].residual_sq >= r.report.sweep[i - 1].residual_sq * (1.0 - 1e-6));
  }

  TEST_CASE("TV of the 1-D estimate decreases along the lambda grid") {
    const PixelGrid g = grid1(64);
    std::vector<double> b(64);
    CounterRng rng(9);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = (i < 20 ? 1.0 : i < 45 ? 4.0 : 2.0) + 0.4 * rng.normal();
    const test::IdentityOperator id(g.size());
    double previous = std::numeric_limits<double>::infinity();
    for (double lambda : {0.1, 0.3, 1.0, 2.0, 3.0, 5.0}) {
      RegConfig cfg;
      cfg.fixed_lambda = lambda;
      cfg.max_outer_iters = 60;
      cfg.max_inner_iters = 200;
      cfg.outer_tolerance = 1e-6;
      cfg.tv_smoothing = 1e-4;
      const SolveResult r = solve(id, b, cfg, g);
      const double tv = total_variation(r.raw, g);
      CHECK(tv <= previous * (1.0 + 1e-3));
      previous = tv;
    }
  }

  TEST_CASE("large lambda drives GCV to |b|^2 / rows") {
    const PixelGrid g = grid2(10, 10.0);
    const NoisyImage img = noisy_blocks(10, 0.1, CounterRng(2));
    const test::IdentityOperator id(g.size());
    RegConfig cfg;
    cfg.penalty = Penalty::tikhonov;
    double bb = 0.0;
    for (double x : img.b) bb += x * x;
    const double value = gcv_value(id, img.b, 1e6, cfg, g, 10, 1);
    CHECK(value == doctest::Approx(bb / static_cast<double>(g.size())).epsilon(1e-3));
  }

  TEST_CASE("GCV estimates with two probe seeds agree within 5%") {
    const PixelGrid g = grid2(32, 32.0);
    const NoisyImage img = noisy_blocks(32, 0.3, CounterRng(4));
    const test::IdentityOperator id(g.size());
    RegConfig cfg;
    for (double lambda : {0.3, 1.0, 3.0}) {
      const double a = gcv_value(id, img.b, lambda, cfg, g, 20, 1);
      const double c = gcv_value(id, img.b, lambda, cfg, g, 20, 2);
      CHECK(std::abs(a - c) <= 0.05 * std::max(a, c));
    }
  }

  TEST_CASE("GCV selection on the identity problem") {
    const PixelGrid g = grid2(32, 32.0);
    const test::IdentityOperator id(g.size());
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const NoisyImage img = noisy_blocks(32, 0.5, CounterRng(100 + seed));
      RegConfig cfg;
      cfg.selection = Selection::gcv;
      cfg.nonnegativity = false;
      cfg.seed = seed;
      const SolveResult chosen = solve(id, img.b, cfg, g);
      double nb = 0.0;
      for (double x : img.b) nb += x * x;
      double best = std::numeric_limits<double>::infinity();
      for (double f : RegConfig::default_lambda_factors()) {
        RegConfig fixed = cfg;
        fixed.fixed_lambda = f * std::sqrt(nb);
        best = std::min(best, test::rel_diff(solve(id, img.b, fixed, g).raw, img.truth));
      }
      CHECK(test::rel_diff(chosen.raw, img.truth) <= 1.5 * best);
    }
  }

  TEST_CASE("Tikhonov minimizer is linear in the data") {
    const PixelGrid g = grid2(12, 12.0);
    const NoisyImage img = noisy_blocks(12, 0.2, CounterRng(6));
    CounterRng rng(8);
    std::vector<double> a(60 * g.size());
    for (auto& x : a) x = rng.uniform(0.0, 1.0);
    const DenseOperator op(60, g.size(), a);
    const auto b = op.apply(img.truth);
    RegConfig cfg;
    cfg.penalty = Penalty::tikhonov;
    cfg.fixed_lambda = 0.5;
    cfg.nonnegativity = false;
    cfg.tolerance = 1e-14;
    cfg.max_inner_iters = 5000;
    const auto base = solve(op, b, cfg, g).raw;
    for (double c : {0.25, 3.0, 17.5}) {
      std::vector<double> cb = b;
      for (double& x : cb) x *= c;
      auto scaled = base;
      for (double& x : scaled) x *= c;
      CHECK(test::rel_diff(solve(op, cb, cfg, g).raw, scaled) <= 1e-8);
    }
  }

  TEST_CASE("error paths") {
    const PixelGrid g = grid2(4, 4.0);
    const test::IdentityOperator id(g.size());
    RegConfig cfg;
    cfg.selection = Selection::gcv;
    try {
      solve(id, std::vector<double>(16, 0.0), cfg, g);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::degenerate_input);
    }
    RegConfig upre;
    try {
      solve(id, std::vector<double>(16, 1.0), upre, g);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::validation);
    }
    CHECK_THROWS_AS(solve(id, std::vector<double>(15, 1.0), cfg, g), Error);
  }

  TEST_CASE("non-convergence is flagged, not fatal") {
    const PixelGrid g = grid2(16, 16.0);
    const NoisyImage img = noisy_blocks(16, 0.3, CounterRng(3));
    const test::IdentityOperator id(g.size());
    RegConfig cfg;
    cfg.fixed_lambda = 1.0;
    cfg.max_outer_iters = 1;
    cfg.max_inner_iters = 1;
    const SolveResult r = solve(id, img.b, cfg, g);
    CHECK_FALSE(r.report.converged);
    CHECK(r.estimate.values.size() == g.size());
  }

  TEST_CASE("noiseless 16x16 half-space TV recovery") {
    DensitySpec spec;
    spec.domain_lo = {0.0, 0.0};
    spec.domain_hi = {16.0, 16.0};
    spec.components = {{0.6, GaussianComponent{{6.0, 9.0}, 2.5}}, {0.4, UniformComponent{{9.0, 2.0}, {14.0, 7.0}}}};
    const PixelGrid g = grid2(16, 16.0);
    const auto truth = eval_density(spec, g).values;
    HalfSpaceGeometryConfig hc;
    hc.directions = 60;
    hc.offsets = 41;
    const RadonOperator op = RadonOperator::assemble(g, make_halfspace_geometry(g, hc));
    const auto b = op.apply(truth);
    RegConfig cfg;
    cfg.fixed_lambda = 1e-5;
    cfg.max_outer_iters = 30;
    cfg.max_inner_iters = 300;
    const SolveResult r = solve(op, b, cfg, g);
    CHECK(relative_error(truth, r.estimate.values) <= 0.05);
    CHECK(r.report.objective_monotone);
  }

  TEST_CASE("upre selection on empirical ball projections") {
    const DensitySpec spec = [] {
      DensitySpec s;
      s.domain_lo = {0.0, 0.0};
      s.domain_hi = {40.0, 40.0};
      s.components = {{0.5, GaussianComponent{{14.0, 24.0}, 4.0}}, {0.5, UniformComponent{{20.0, 6.0}, {34.0, 20.0}}}};
      return s;
    }();
    const PixelGrid g = grid2(40, 40.0);
    PipelineConfig cfg;
    cfg.reg.trace_probes = 8;
    const PointCloud cloud = sample_density(spec, 4000, 3);
    const PipelineResult r = estimate_density(cloud, g, cfg);
    CHECK(r.report.selection == "upre");
    CHECK(r.report.sweep.size() >= 2);
    CHECK(relative_error(eval_density(spec, g).values, r.estimate.values) <= 0.4);
  }

  TEST_CASE("covariance-weighted trace matches the dense value on both estimator branches") {
    const PixelGrid g = grid2(4, 4.0);
    CounterRng rng(12);
    const std::size_t rows = 40, N = g.size();
    std::vector<double> a(rows * N);
    for (double& x : a) x = rng.uniform(0.0, 1.0) < 0.4 ? 1.0 : 0.0;
    const DenseOperator op(rows, N, a);
    std::vector<double> truth(N);
    for (double& x : truth) x = rng.uniform(0.5, 1.5);
    const auto b = op.apply(truth);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(
        a.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(N));
    const Eigen::MatrixXd G = A.transpose() * A;
    for (double lambda : {0.3, 30.0}) {
      RegConfig cfg;
      cfg.penalty = Penalty::tikhonov;
      cfg.lambda_grid = {lambda};
      cfg.lambda_relative = false;
      cfg.nonnegativity = false;
      cfg.trace_probes = 400;
      cfg.tolerance = 1e-12;
      cfg.probe_tolerance = 1e-12;
      cfg.max_inner_iters = 1000;
      const SolveResult r = solve(op, b, cfg, g, NoiseModel{500, Normalization::per_m, 1.0});
      REQUIRE(r.report.sweep.size() == 1);
      Eigen::VectorXd s(static_cast<Eigen::Index>(N));
      for (std::size_t i = 0; i < N; ++i) s[static_cast<Eigen::Index>(i)] = std::sqrt(std::max(r.raw[i], 0.0));
      const Eigen::MatrixXd M = G + lambda * lambda * Eigen::MatrixXd::Identity(G.rows(), G.cols());
      const Eigen::MatrixXd B = s.asDiagonal() * G * M.ldlt().solve(G) * s.asDiagonal();
      CHECK(r.report.sweep[0].trace == doctest::Approx(B.trace()).epsilon(0.05));
    }
  }
}
