#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "raden/pointcloud.hpp"
#include "raden/projection.hpp"

namespace raden {

/// sqrt(log(2/p) / (2m)): the DKW deviation exceeded with probability <= p.
double dkw_epsilon(double m, double p);

/// Surface area of the unit sphere S^{n-1}, 2 pi^{n/2} / Gamma(n/2); n <= 10.
double sphere_surface_area(int n);

/// First term of the half-space L2 bound, w_{1,n-1} log(2K/p) / m. The
/// Riemann-sum term eps(K) is not included.
double halfspace_l2_bound(double m, double K, double p, int n);

/// (log K + log(2/p)) / m.
double spherical_l2_bound(double m, double K, double p);

/// Worst-case reconstruction error c * data_bound^{1/(2(n+2))} * rho^{1 - 1/(n+2)}
/// where data_bound is a half-space L2 bound and rho bounds the H^{1/2} norm.
/// c has no known value, so this is a formula with placeholders only.
double reconstruction_l2_bound(double c, double rho, double data_bound, int n);

/// Second, independently written evaluation of the three bound formulas
/// (exponential/log rearrangements) used to cross-check them.
namespace alt {
double dkw_epsilon(double m, double p);
double halfspace_l2_bound(double m, double K, double p, int n);
double spherical_l2_bound(double m, double K, double p);
}  // namespace alt

/// CDF of theta . X for X uniform on the box [lo, hi].
double box_projection_cdf(std::span<const double> lo, std::span<const double> hi, std::span<const double> theta,
                          double t);

/// CDF of theta . X for a mixture of uniform boxes (no truncation needed).
/// Throws Error(unsupported) for any other component kind.
double projected_cdf(const DensitySpec& spec, std::span<const double> theta, double t);

struct CoverageReport {
  std::size_t m = 0;
  std::size_t trials = 0;
  std::size_t directions = 0;
  double p = 0.0;
  /// dkw_epsilon(m, p / K).
  double threshold = 0.0;
  std::size_t violations = 0;
  double violation_fraction = 0.0;
  double mean_sup_error = 0.0;
  std::vector<double> sup_errors;  // max over directions, per trial
};

/// Per trial: sample, take the sup-norm distance between empirical and exact
/// projected CDFs for every direction pi k / K, and count trials whose
/// maximum reaches the Bonferroni-adjusted DKW threshold.
CoverageReport coverage_experiment(const DensitySpec& spec, std::size_t m, std::size_t directions, double p,
                                   std::size_t trials, std::uint64_t seed);

}  // namespace raden
