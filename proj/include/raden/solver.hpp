#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "raden/grid.hpp"
#include "raden/projection.hpp"
#include "raden/radon_operator.hpp"

namespace raden {

enum class Penalty { tikhonov, tv };

/// How lambda is picked from the grid when no fixed value is given.
///
/// `gcv`: generalized cross validation, white-noise model.
/// `upre`: unbiased predictive risk with the multinomial covariance of
/// empirical counts, Cov(b) = (s R diag(v/w) R^T - b b^T) / m, where s is 1
/// for per-m data and m for raw counts. Needs the sample count.
enum class Selection { gcv, upre };

std::string_view to_string(Penalty penalty);
std::string_view to_string(Selection selection);

/// Regularized least squares  ||R v - b||^2 + lambda^2 G(v).
struct RegConfig {
  Penalty penalty = Penalty::tv;
  Selection selection = Selection::upre;
  /// Candidate lambdas; multiplied by ||b|| when `lambda_relative`.
  /// Empty selects 15 log-spaced factors from 1e-3 to 1e2.
  std::vector<double> lambda_grid;
  bool lambda_relative = true;
  /// Score every grid value instead of walking downhill from the middle.
  bool exhaustive_sweep = false;
  /// Skip selection and solve at this absolute lambda.
  std::optional<double> fixed_lambda;
  int max_outer_iters = 15;
  int max_inner_iters = 80;
  /// Inner solves stop at this relative residual.
  double tolerance = 1e-6;
  /// Outer (reweighting) loop stops when the relative change of v drops below this.
  double outer_tolerance = 1e-3;
  /// TV smoothing beta; defaults to 1e-4 * max(b) / pixel volume.
  std::optional<double> tv_smoothing;
  bool nonnegativity = true;
  int trace_probes = 20;
  /// Relative residual for the probe solves inside the trace estimate.
  double probe_tolerance = 1e-3;
  std::uint64_t seed = 0;

  static std::vector<double> default_lambda_factors();
  void validate() const;
};

struct LambdaTrial {
  double lambda = 0.0;
  double gcv = 0.0;
  bool gcv_valid = false;
  double residual_sq = 0.0;
  /// Influence trace (gcv) or covariance-weighted influence trace (upre).
  double trace = 0.0;
  /// Predictive risk estimate up to a lambda-independent constant (upre).
  double risk = 0.0;
  double penalty_value = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool converged = false;
};

struct SolveReport {
  std::string selection;  // "gcv", "upre" or "fixed"
  double chosen_lambda = 0.0;
  double beta = 0.0;
  std::vector<LambdaTrial> sweep;
  int iterations = 0;           // inner iterations summed over the whole run
  double final_residual = 0.0;  // ||R v - b||_2 at the chosen lambda
  std::vector<double> objective_trace;
  bool converged = true;
  bool objective_monotone = true;
};

struct DensityEstimate {
  PixelGrid grid;
  std::vector<double> values;
};

struct SolveResult {
  DensityEstimate estimate;
  std::vector<double> raw;  // minimizer before clipping and renormalization
  SolveReport report;
};

/// Sample count and scale of the data, required by upre selection.
struct NoiseModel {
  std::size_t m = 0;
  Normalization normalization = Normalization::per_m;
  /// Operator entry weight w.
  double weight = 1.0;
};

SolveResult solve(const LinearOperator& op, std::span<const double> b, const RegConfig& config, const PixelGrid& grid,
                  const std::optional<NoiseModel>& noise = std::nullopt);
/// Takes the noise model from `b` and the operator weight from `op`.
SolveResult solve(const RadonOperator& op, const MeasurementVector& b, const RegConfig& config, const PixelGrid& grid);

/// rows * ||R v_lambda - b||^2 / (rows - t_lambda)^2 with t_lambda the
/// Hutchinson estimate of the influence trace at the converged quadratic.
double gcv_value(const LinearOperator& op, std::span<const double> b, double lambda, const RegConfig& config,
                 const PixelGrid& grid, int probes, std::uint64_t seed);

/// Clip negatives and scale to unit integral.
DensityEstimate normalize(std::span<const double> values, const PixelGrid& grid);

/// Anisotropic total variation: forward differences along every axis,
/// replicate boundary (edges leaving the grid contribute nothing).
double total_variation(std::span<const double> v, const PixelGrid& grid);
/// sum over edges of sqrt(d^2 + beta^2).
double smoothed_total_variation(std::span<const double> v, const PixelGrid& grid, double beta);
std::vector<double> smoothed_total_variation_gradient(std::span<const double> v, const PixelGrid& grid, double beta);

}  // namespace raden
