#include "raden/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "raden/error.hpp"
#include "raden/kernels.hpp"
#include "raden/rng.hpp"

namespace raden {

std::string_view to_string(Penalty penalty) { return penalty == Penalty::tv ? "tv-anisotropic" : "tikhonov"; }
std::string_view to_string(Selection selection) { return selection == Selection::gcv ? "gcv" : "upre"; }

std::vector<double> RegConfig::default_lambda_factors() {
  std::vector<double> out(15);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::pow(10.0, -3.0 + 5.0 * static_cast<double>(i) / 14.0);
  return out;
}

void RegConfig::validate() const {
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    require(lambda_grid[i] > 0.0, "lambda grid values must be positive");
    if (i > 0) require(lambda_grid[i] > lambda_grid[i - 1], "lambda grid must be strictly increasing");
  }
  if (fixed_lambda) require(*fixed_lambda > 0.0, "fixed lambda must be positive");
  require(tolerance > 0.0 && tolerance < 1.0, "tolerance must lie in (0, 1)");
  require(outer_tolerance > 0.0, "outer tolerance must be positive");
  require(max_outer_iters >= 1 && max_inner_iters >= 1, "iteration caps must be positive");
  require(trace_probes >= 1, "need at least one trace probe");
  if (tv_smoothing) require(*tv_smoothing > 0.0, "TV smoothing must be positive");
}

namespace {

using Vec = std::vector<double>;

std::size_t axis_stride(const PixelGrid& grid, int axis) {
  std::size_t stride = 1;
  for (int a = 0; a < axis; ++a) stride *= grid.shape()[static_cast<std::size_t>(a)];
  return stride;
}

// d[a * N + i] = v[i + stride_a] - v[i] for interior edges, 0 on the far face.
void forward_diff(std::span<const double> v, const PixelGrid& grid, std::span<double> d) {
  const std::size_t N = grid.size();
  for (int a = 0; a < grid.dim(); ++a) {
    const std::size_t stride = axis_stride(grid, a);
    const std::size_t n = grid.shape()[static_cast<std::size_t>(a)];
    double* out = d.data() + static_cast<std::size_t>(a) * N;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(N); ++i) {
      const auto ui = static_cast<std::size_t>(i);
      out[ui] = ((ui / stride) % n + 1 < n) ? v[ui + stride] - v[ui] : 0.0;
    }
  }
}

// out = D^T d
void forward_diff_adjoint(std::span<const double> d, const PixelGrid& grid, std::span<double> out) {
  const std::size_t N = grid.size();
  std::fill(out.begin(), out.end(), 0.0);
  for (int a = 0; a < grid.dim(); ++a) {
    const std::size_t stride = axis_stride(grid, a);
    const std::size_t n = grid.shape()[static_cast<std::size_t>(a)];
    const double* da = d.data() + static_cast<std::size_t>(a) * N;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(N); ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const std::size_t k = (ui / stride) % n;
      double acc = 0.0;
      if (k + 1 < n) acc -= da[ui];
      if (k > 0) acc += da[ui - stride];
      out[ui] += acc;
    }
  }
}

bool edge_valid(const PixelGrid& grid, int axis, std::size_t i) {
  return (i / axis_stride(grid, axis)) % grid.shape()[static_cast<std::size_t>(axis)] + 1 <
         grid.shape()[static_cast<std::size_t>(axis)];
}

struct PcgStats {
  int iterations = 0;
  bool converged = false;
};

// Preconditioned conjugate gradients, warm-started from x. The
// preconditioner is Jacobi plus an exact correction along the constant
// vector: P^-1 r = r / diag + (1.r / 1.M1) 1.
PcgStats pcg(const std::function<void(std::span<const double>, std::span<double>)>& apply_m,
             std::span<const double> rhs, std::span<double> x, std::span<const double> diag, double ones_energy,
             int max_iters, double tolerance) {
  const std::size_t n = rhs.size();
  Vec r(n), z(n), p(n), mp(n);
  apply_m(x, mp);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - mp[i];
  const double rhs_norm = std::sqrt(kernels::norm_sq(rhs));
  PcgStats stats;
  if (rhs_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    stats.converged = true;
    return stats;
  }
  if (std::sqrt(kernels::norm_sq(r)) <= tolerance * rhs_norm) {
    stats.converged = true;
    return stats;
  }
  auto precondition = [&] {
    double coarse = 0.0;
    if (ones_energy > 0.0) {
      for (double v : r) coarse += v;
      coarse /= ones_energy;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i] + coarse;
  };
  precondition();
  p = z;
  double rz = kernels::dot(r, z);
  for (int it = 0; it < max_iters; ++it) {
    apply_m(p, mp);
    const double pmp = kernels::dot(p, mp);
    if (!(pmp > 0.0)) break;
    const double alpha = rz / pmp;
    kernels::axpy(alpha, p, x);
    kernels::axpy(-alpha, mp, r);
    stats.iterations = it + 1;
    if (std::sqrt(kernels::norm_sq(r)) <= tolerance * rhs_norm) {
      stats.converged = true;
      break;
    }
    precondition();
    const double rz_new = kernels::dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return stats;
}

// Quadratic model  M = R^T R + mu * Q  with Q = I (Tikhonov) or D^T W D
// (lagged-diffusivity TV with frozen edge weights W).
class QuadraticModel {
 public:
  QuadraticModel(const LinearOperator& op, const PixelGrid& grid, Penalty penalty)
      : op_(op), grid_(grid), penalty_(penalty), normal_diag_(op.normal_diagonal()),
        meas_(op.rows()), edges_(static_cast<std::size_t>(grid.dim()) * grid.size()), tmp_(grid.size()) {}

  void set_mu(double mu) { mu_ = mu; }
  double mu() const { return mu_; }
  void set_weights(Vec weights) { weights_ = std::move(weights); }
  const Vec& weights() const { return weights_; }

  void apply(std::span<const double> x, std::span<double> out) {
    op_.apply(x, meas_);
    op_.adjoint(meas_, out);
    if (penalty_ == Penalty::tikhonov) {
      kernels::axpy(mu_, x, out);
      return;
    }
    forward_diff(x, grid_, edges_);
    for (std::size_t e = 0; e < edges_.size(); ++e) edges_[e] *= weights_[e];
    forward_diff_adjoint(edges_, grid_, tmp_);
    kernels::axpy(mu_, tmp_, out);
  }

  // out = Q x
  void apply_penalty(std::span<const double> x, std::span<double> out) {
    if (penalty_ == Penalty::tikhonov) {
      std::copy(x.begin(), x.end(), out.begin());
      return;
    }
    forward_diff(x, grid_, edges_);
    for (std::size_t e = 0; e < edges_.size(); ++e) edges_[e] *= weights_[e];
    forward_diff_adjoint(edges_, grid_, out);
  }

  const Vec& normal_diagonal() const { return normal_diag_; }

  Vec diagonal() const {
    Vec d = normal_diag_;
    if (penalty_ == Penalty::tikhonov) {
      for (double& x : d) x += mu_;
    } else {
      const std::size_t N = grid_.size();
      for (int a = 0; a < grid_.dim(); ++a) {
        const std::size_t stride = axis_stride(grid_, a);
        for (std::size_t i = 0; i < N; ++i) {
          if (!edge_valid(grid_, a, i)) continue;
          const double w = weights_[static_cast<std::size_t>(a) * N + i];
          d[i] += mu_ * w;
          d[i + stride] += mu_ * w;
        }
      }
    }
    for (double& x : d)
      if (!(x > 0.0)) x = 1.0;
    return d;
  }

  PcgStats solve(std::span<const double> rhs, std::span<double> x, int max_iters, double tol) {
    const Vec diag = diagonal();
    const Vec ones(x.size(), 1.0);
    Vec m1(x.size());
    apply(ones, m1);
    double energy = 0.0;
    for (double v : m1) energy += v;
    return pcg([this](std::span<const double> in, std::span<double> out) { apply(in, out); }, rhs, x, diag, energy,
               max_iters, tol);
  }

 private:
  const LinearOperator& op_;
  const PixelGrid& grid_;
  Penalty penalty_;
  Vec normal_diag_;
  Vec weights_;
  double mu_ = 0.0;
  Vec meas_;
  Vec edges_;
  Vec tmp_;
};

Vec tv_weights(std::span<const double> v, const PixelGrid& grid, double beta) {
  Vec d(static_cast<std::size_t>(grid.dim()) * grid.size());
  forward_diff(v, grid, d);
  for (double& x : d) x = 1.0 / std::sqrt(x * x + beta * beta);
  return d;
}

struct Problem {
  const LinearOperator& op;
  std::span<const double> b;
  const PixelGrid& grid;
  const RegConfig& config;
  double beta;
  Vec rhs;  // R^T b
  std::optional<NoiseModel> noise;
};

double residual_sq(const Problem& pb, std::span<const double> v) {
  Vec rv = pb.op.apply(v);
  for (std::size_t j = 0; j < rv.size(); ++j) rv[j] -= pb.b[j];
  return kernels::norm_sq(rv);
}

double penalty_value(const Problem& pb, std::span<const double> v) {
  return pb.config.penalty == Penalty::tv ? smoothed_total_variation(v, pb.grid, pb.beta) : kernels::norm_sq(v);
}

struct FixedLambdaRun {
  Vec v;
  Vec objective;
  int outer = 0;
  int inner = 0;
  bool converged = false;
  bool monotone = true;
};

// Minimize at one lambda, warm-started from v (and leaving the final
// quadratic's weights in `model`).
FixedLambdaRun run_fixed(const Problem& pb, QuadraticModel& model, double lambda, Vec v) {
  const RegConfig& cfg = pb.config;
  FixedLambdaRun run;
  const double l2 = lambda * lambda;
  auto objective = [&](std::span<const double> x) { return residual_sq(pb, x) + l2 * penalty_value(pb, x); };

  if (cfg.penalty == Penalty::tikhonov) {
    model.set_mu(l2);
    run.objective.push_back(objective(v));
    const PcgStats st = model.solve(pb.rhs, v, cfg.max_inner_iters, cfg.tolerance);
    run.objective.push_back(objective(v));
    run.outer = 1;
    run.inner = st.iterations;
    run.converged = st.converged;
  } else {
    model.set_mu(0.5 * l2);
    double current = objective(v);
    run.objective.push_back(current);
    for (int k = 0; k < cfg.max_outer_iters; ++k) {
      model.set_weights(tv_weights(v, pb.grid, pb.beta));
      Vec next = v;
      const PcgStats st = model.solve(pb.rhs, next, cfg.max_inner_iters, cfg.tolerance);
      run.inner += st.iterations;
      run.outer = k + 1;
      const double value = objective(next);
      if (value > current * (1.0 + 1e-10) + 1e-300) run.monotone = false;
      run.objective.push_back(value);
      current = value;
      double diff = 0.0;
      double norm = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        diff += (next[i] - v[i]) * (next[i] - v[i]);
        norm += next[i] * next[i];
      }
      v = std::move(next);
      if (norm == 0.0 || std::sqrt(diff / norm) < cfg.outer_tolerance) {
        run.converged = st.converged || std::sqrt(diff / std::max(norm, 1e-300)) < cfg.outer_tolerance;
        break;
      }
    }
  }
  run.v = std::move(v);
  return run;
}

// Edge weights of the Hessian of the smoothed TV term at v:
// beta^2 / (d^2 + beta^2)^(3/2).
Vec tv_curvature_weights(std::span<const double> v, const PixelGrid& grid, double beta) {
  Vec d(static_cast<std::size_t>(grid.dim()) * grid.size());
  forward_diff(v, grid, d);
  const double b2 = beta * beta;
  for (double& x : d) {
    const double s = x * x + b2;
    x = b2 / (s * std::sqrt(s));
  }
  return d;
}

// trace(M^-1 R^T R) = cols - mu trace(L M^-1 L^T) for M = R^T R + mu L^T L.
// The complement is estimated with Rademacher probes y = L^T z (z in edge
// space for TV, pixel space for Tikhonov), so the GCV denominator
// rows - t carries a relative rather than an absolute error. When that puts
// t below cols / 2, t is re-estimated directly as z^T M^-1 R^T R z. The
// result is floored at the penalty's null-space dimension (1 for TV).
// TV uses the Hessian weights at v: M^-1 R^T R is then the Jacobian of the
// smoothed-TV minimizer with respect to the data.
double influence_trace(const Problem& pb, QuadraticModel& model, std::span<const double> v, int probes,
                       std::uint64_t seed, std::vector<Vec>* warm) {
  const std::size_t N = pb.grid.size();
  const bool tv = pb.config.penalty == Penalty::tv;
  Vec lagged;
  if (tv) {
    lagged = model.weights();
    model.set_weights(tv_curvature_weights(v, pb.grid, pb.beta));
  }
  const std::size_t E = tv ? static_cast<std::size_t>(pb.grid.dim()) * N : N;
  const CounterRng master(seed);
  double total = 0.0;
  Vec z(E), y(N);
  for (int q = 0; q < probes; ++q) {
    CounterRng rng = master.substream(static_cast<std::uint64_t>(q));
    for (double& x : z) x = rng.sign();
    if (tv) {
      const Vec& w = model.weights();
      for (std::size_t e = 0; e < E; ++e) z[e] *= std::sqrt(w[e]);
      forward_diff_adjoint(z, pb.grid, y);
    } else {
      y = z;
    }
    Vec x = (warm && static_cast<std::size_t>(q) < warm->size()) ? (*warm)[static_cast<std::size_t>(q)] : Vec(N, 0.0);
    model.solve(y, x, pb.config.max_inner_iters, pb.config.probe_tolerance);
    total += kernels::dot(y, x);
    if (warm) {
      if (warm->size() <= static_cast<std::size_t>(q)) warm->resize(static_cast<std::size_t>(q) + 1);
      (*warm)[static_cast<std::size_t>(q)] = std::move(x);
    }
  }
  double trace = static_cast<double>(N) - model.mu() * total / static_cast<double>(probes);
  if (trace < 0.5 * static_cast<double>(N)) {
    const CounterRng direct = master.substream(static_cast<std::uint64_t>(probes));
    total = 0.0;
    Vec p(N), x(N);
    for (int q = 0; q < probes; ++q) {
      CounterRng rng = direct.substream(static_cast<std::uint64_t>(q));
      for (double& e : p) e = rng.sign();
      const Vec rhs = pb.op.adjoint(pb.op.apply(p));
      std::fill(x.begin(), x.end(), 0.0);
      model.solve(rhs, x, pb.config.max_inner_iters, pb.config.probe_tolerance);
      total += kernels::dot(p, x);
    }
    trace = total / static_cast<double>(probes);
  }
  if (tv) model.set_weights(std::move(lagged));
  return std::max(tv ? 1.0 : 0.0, trace);
}

// Estimate of trace(B), B = S G M^-1 G S with G = R^T R and
// S = diag(sqrt(max(v,0)/w)): the covariance-weighted influence trace used by
// the predictive risk. Since G M^-1 G = G - mu G M^-1 Q,
//   trace(B) = sum_i S_ii^2 G_ii - mu trace(S G M^-1 Q S),
// the first term exact and the second probed. When the probed correction
// exceeds half the exact term, B is probed directly instead.
double weighted_influence_trace(const Problem& pb, QuadraticModel& model, std::span<const double> v, int probes,
                                std::uint64_t seed, std::vector<Vec>* warm) {
  const std::size_t N = pb.grid.size();
  const double w = pb.noise->weight;
  Vec scale(N);
  for (std::size_t i = 0; i < N; ++i) scale[i] = std::sqrt(std::max(v[i], 0.0) / w);
  const Vec& gdiag = model.normal_diagonal();
  double exact = 0.0;
  for (std::size_t i = 0; i < N; ++i) exact += scale[i] * scale[i] * gdiag[i];

  const CounterRng master(seed);
  auto scaled_probe = [&](int q) {
    CounterRng rng = master.substream(static_cast<std::uint64_t>(q));
    Vec z(N);
    for (std::size_t i = 0; i < N; ++i) z[i] = rng.sign() * scale[i];
    return z;
  };
  auto solve_slot = [&](const Vec& rhs, std::size_t slot) {
    Vec x = (warm && slot < warm->size()) ? (*warm)[slot] : Vec(N, 0.0);
    model.solve(rhs, x, pb.config.max_inner_iters, pb.config.probe_tolerance);
    if (warm) {
      if (warm->size() <= slot) warm->resize(slot + 1);
      (*warm)[slot] = x;
    }
    return x;
  };
  const auto P = static_cast<std::size_t>(probes);

  double correction = 0.0;
  for (int q = 0; q < probes; ++q) {
    const Vec z = scaled_probe(q);
    Vec qz(N);
    model.apply_penalty(z, qz);
    const Vec x = solve_slot(qz, static_cast<std::size_t>(q));
    correction += kernels::dot(pb.op.adjoint(pb.op.apply(z)), x);
  }
  correction *= model.mu() / static_cast<double>(probes);
  if (correction <= 0.5 * exact) return exact - correction;

  double total = 0.0;
  for (int q = 0; q < probes; ++q) {
    const Vec y = pb.op.adjoint(pb.op.apply(scaled_probe(q)));
    total += kernels::dot(y, solve_slot(y, P + static_cast<std::size_t>(q)));
  }
  return total / static_cast<double>(probes);
}

// ||R v - b||^2 + 2 tr(A C), A = R M^-1 R^T the data-space influence map
// and C the multinomial covariance of b. Differs from the expected
// ||R v - R f||^2 by the constant tr(C).
double predictive_risk(const Problem& pb, std::span<const double> v, double res_sq, double weighted_trace) {
  const NoiseModel& nm = *pb.noise;
  const double m = static_cast<double>(nm.m);
  const double s = nm.normalization == Normalization::per_m ? 1.0 : m;
  const Vec rv = pb.op.apply(v);
  return res_sq + 2.0 / m * (s * weighted_trace - kernels::dot(pb.b, rv));
}

Problem make_problem(const LinearOperator& op, std::span<const double> b, const RegConfig& config, const PixelGrid& grid,
                     const std::optional<NoiseModel>& noise) {
  config.validate();
  if (noise) {
    require(noise->m > 0, "noise model needs a positive sample count");
    require(noise->weight > 0.0, "noise model needs a positive operator weight");
  }
  require(op.rows() == b.size(), "measurement length does not match operator rows");
  require(op.cols() == grid.size(), "operator columns do not match the pixel grid");
  double bmax = 0.0;
  bool nonzero = false;
  for (double x : b) {
    require(std::isfinite(x), "measurements must be finite");
    bmax = std::max(bmax, std::abs(x));
    nonzero = nonzero || x != 0.0;
  }
  if (!nonzero) fail(ErrorCode::degenerate_input, "all measurements are zero");
  const double beta = config.tv_smoothing.value_or(1e-4 * bmax / grid.pixel_volume());
  return Problem{op, b, grid, config, beta, op.adjoint(b), noise};
}

double gcv_from(std::size_t rows, double res_sq, double trace) {
  const double dof = static_cast<double>(rows) - trace;
  return static_cast<double>(rows) * res_sq / (dof * dof);
}

}  // namespace

double total_variation(std::span<const double> v, const PixelGrid& grid) {
  require(v.size() == grid.size(), "vector length does not match grid");
  Vec d(static_cast<std::size_t>(grid.dim()) * grid.size());
  forward_diff(v, grid, d);
  double total = 0.0;
  for (double x : d) total += std::abs(x);
  return total;
}

double smoothed_total_variation(std::span<const double> v, const PixelGrid& grid, double beta) {
  require(v.size() == grid.size(), "vector length does not match grid");
  const std::size_t N = grid.size();
  Vec d(static_cast<std::size_t>(grid.dim()) * N);
  forward_diff(v, grid, d);
  double total = 0.0;
  for (int a = 0; a < grid.dim(); ++a)
    for (std::size_t i = 0; i < N; ++i)
      if (edge_valid(grid, a, i)) {
        const double x = d[static_cast<std::size_t>(a) * N + i];
        total += std::sqrt(x * x + beta * beta);
      }
  return total;
}

std::vector<double> smoothed_total_variation_gradient(std::span<const double> v, const PixelGrid& grid, double beta) {
  require(v.size() == grid.size(), "vector length does not match grid");
  Vec d(static_cast<std::size_t>(grid.dim()) * grid.size());
  forward_diff(v, grid, d);
  for (double& x : d) x /= std::sqrt(x * x + beta * beta);
  Vec g(grid.size());
  forward_diff_adjoint(d, grid, g);
  return g;
}

DensityEstimate normalize(std::span<const double> values, const PixelGrid& grid) {
  require(values.size() == grid.size(), "normalize: vector length does not match grid");
  DensityEstimate out{grid, Vec(values.begin(), values.end())};
  double sum = 0.0;
  for (double& x : out.values) {
    require(std::isfinite(x), "normalize: values must be finite");
    x = std::max(0.0, x);
    sum += x;
  }
  if (!(sum > 0.0)) fail(ErrorCode::degenerate_estimate, "estimate has no positive mass");
  const double scale = 1.0 / (sum * grid.pixel_volume());
  for (double& x : out.values) x *= scale;
  return out;
}

SolveResult solve(const LinearOperator& op, std::span<const double> b, const RegConfig& config, const PixelGrid& grid,
                  const std::optional<NoiseModel>& noise) {
  const Problem pb = make_problem(op, b, config, grid, noise);
  const bool upre = !config.fixed_lambda && config.selection == Selection::upre;
  if (upre && !noise) fail(ErrorCode::validation, "upre selection needs the sample count of the measurements");
  QuadraticModel model(op, grid, config.penalty);
  SolveResult result{DensityEstimate{grid, {}}, {}, {}};
  SolveReport& report = result.report;
  report.beta = pb.beta;

  if (config.fixed_lambda) {
    report.selection = "fixed";
    FixedLambdaRun run = run_fixed(pb, model, *config.fixed_lambda, Vec(grid.size(), 0.0));
    LambdaTrial trial;
    trial.lambda = *config.fixed_lambda;
    trial.residual_sq = residual_sq(pb, run.v);
    trial.penalty_value = penalty_value(pb, run.v);
    trial.outer_iterations = run.outer;
    trial.inner_iterations = run.inner;
    trial.converged = run.converged;
    report.sweep.push_back(trial);
    report.chosen_lambda = trial.lambda;
    report.iterations = run.inner;
    report.final_residual = std::sqrt(trial.residual_sq);
    report.objective_trace = run.objective;
    report.converged = run.converged;
    report.objective_monotone = run.monotone;
    result.raw = std::move(run.v);
  } else {
    report.selection = std::string(to_string(config.selection));
    Vec factors = config.lambda_grid.empty() ? RegConfig::default_lambda_factors() : config.lambda_grid;
    const double scale = config.lambda_relative ? std::sqrt(kernels::norm_sq(b)) : 1.0;
    std::vector<Vec> warm_probes;
    std::vector<std::optional<double>> scores(factors.size());
    std::vector<LambdaTrial> trials;
    Vec v(grid.size(), 0.0);
    double best = std::numeric_limits<double>::infinity();
    auto evaluate = [&](std::size_t idx) {
      const double lambda = factors[idx] * scale;
      FixedLambdaRun run = run_fixed(pb, model, lambda, v);
      LambdaTrial trial;
      trial.lambda = lambda;
      trial.residual_sq = residual_sq(pb, run.v);
      trial.penalty_value = penalty_value(pb, run.v);
      trial.outer_iterations = run.outer;
      trial.inner_iterations = run.inner;
      trial.converged = run.converged;
      double score = 0.0;
      if (upre) {
        const double wt = weighted_influence_trace(pb, model, run.v, config.trace_probes, config.seed, &warm_probes);
        trial.risk = predictive_risk(pb, run.v, trial.residual_sq, wt);
        trial.trace = wt;
        score = trial.risk;
      } else {
        trial.trace = influence_trace(pb, model, run.v, config.trace_probes, config.seed, &warm_probes);
        trial.gcv_valid = trial.trace < static_cast<double>(op.rows()) * (1.0 - 1e-12);
        trial.gcv = trial.gcv_valid ? gcv_from(op.rows(), trial.residual_sq, trial.trace)
                                    : std::numeric_limits<double>::infinity();
        score = trial.gcv_valid ? trial.gcv : std::numeric_limits<double>::infinity();
      }
      report.iterations += run.inner;
      if (score < best) {
        best = score;
        report.chosen_lambda = lambda;
        report.final_residual = std::sqrt(trial.residual_sq);
        report.objective_trace = run.objective;
        report.converged = run.converged;
        result.raw = run.v;
      }
      report.objective_monotone = report.objective_monotone && run.monotone;
      v = std::move(run.v);
      trials.push_back(trial);
      scores[idx] = score;
      return score;
    };

    if (config.exhaustive_sweep) {
      // Largest lambda first, each solve warm-started from its smoother neighbour.
      for (std::size_t idx = factors.size(); idx-- > 0;) evaluate(idx);
    } else {
      // Walk downhill over the grid from its midpoint and stop at the first
      // index whose neighbours both score higher.
      std::size_t cur = factors.size() / 2;
      double cur_score = evaluate(cur);
      const Vec mid = v;
      const double up = cur + 1 < factors.size() ? evaluate(cur + 1) : std::numeric_limits<double>::infinity();
      const Vec above = v;
      v = mid;
      const double down = cur > 0 ? evaluate(cur - 1) : std::numeric_limits<double>::infinity();
      int direction = 0;
      if (std::min(up, down) < cur_score) direction = up < down ? 1 : -1;
      if (direction > 0) v = above;
      if (direction != 0) {
        cur = direction > 0 ? cur + 1 : cur - 1;
        cur_score = *scores[cur];
        for (;;) {
          if ((direction > 0 && cur + 1 >= factors.size()) || (direction < 0 && cur == 0)) break;
          const std::size_t next = direction > 0 ? cur + 1 : cur - 1;
          const double next_score = evaluate(next);
          if (!(next_score < cur_score)) break;
          cur = next;
          cur_score = next_score;
        }
      }
    }
    std::sort(trials.begin(), trials.end(), [](const LambdaTrial& x, const LambdaTrial& y) { return x.lambda < y.lambda; });
    report.sweep = std::move(trials);
    if (!(best < std::numeric_limits<double>::infinity()))
      fail(ErrorCode::invalid_gcv, "no lambda in the grid produced a valid GCV value");
  }

  if (config.nonnegativity) {
    result.estimate = normalize(result.raw, grid);
  } else {
    result.estimate = DensityEstimate{grid, result.raw};
  }
  return result;
}

SolveResult solve(const RadonOperator& op, const MeasurementVector& b, const RegConfig& config, const PixelGrid& grid) {
  return solve(op, std::span<const double>(b.values), config, grid, NoiseModel{b.m, b.normalization, op.weight()});
}

double gcv_value(const LinearOperator& op, std::span<const double> b, double lambda, const RegConfig& config,
                 const PixelGrid& grid, int probes, std::uint64_t seed) {
  require(lambda > 0.0, "lambda must be positive");
  require(probes >= 1, "need at least one trace probe");
  const Problem pb = make_problem(op, b, config, grid, std::nullopt);
  QuadraticModel model(op, grid, config.penalty);
  const FixedLambdaRun run = run_fixed(pb, model, lambda, Vec(grid.size(), 0.0));
  const double trace = influence_trace(pb, model, run.v, probes, seed, nullptr);
  if (!(trace < static_cast<double>(op.rows()) * (1.0 - 1e-12)))
    fail(ErrorCode::invalid_gcv, "influence trace reaches the number of rows");
  return gcv_from(op.rows(), residual_sq(pb, run.v), trace);
}

}  // namespace raden
