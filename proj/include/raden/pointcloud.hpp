#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "raden/grid.hpp"
#include "raden/rng.hpp"

namespace raden {

/// m points in R^dim stored contiguously, point-major.
class PointCloud {
 public:
  explicit PointCloud(int dim = 2);
  PointCloud(int dim, std::vector<double> coords);

  int dim() const { return dim_; }
  std::size_t size() const { return coords_.size() / static_cast<std::size_t>(dim_); }
  bool empty() const { return coords_.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  const std::vector<double>& coords() const { return coords_; }

  void reserve(std::size_t m) { coords_.reserve(m * static_cast<std::size_t>(dim_)); }
  void push_back(std::span<const double> p);

  bool operator==(const PointCloud&) const = default;

 private:
  int dim_;
  std::vector<double> coords_;
};

struct GaussianComponent {
  std::vector<double> mean;
  double sigma = 1.0;
};

struct UniformComponent {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Product of independent exponentials, axis k supported on [origin_k, inf).
struct ExponentialComponent {
  double rate = 1.0;
  std::vector<double> origin;
};

/// Product of independent gamma variables shifted to start at origin_k.
struct GammaComponent {
  double shape = 1.0;
  double scale = 1.0;
  std::vector<double> origin;
};

using ComponentKind =
    std::variant<GaussianComponent, UniformComponent, ExponentialComponent, GammaComponent>;

struct MixtureComponent {
  double weight = 1.0;
  ComponentKind kind;
};

/// Declarative mixture density restricted to an axis-aligned domain box.
/// Samples and ground truth are both the mixture truncated to that box.
struct DensitySpec {
  int dim = 2;
  std::vector<double> domain_lo;
  std::vector<double> domain_hi;
  std::vector<MixtureComponent> components;

  /// Throws Error(validation) on any broken invariant.
  void validate() const;
};

struct GroundTruthGrid {
  PixelGrid grid;
  std::vector<double> values;
};

/// Untruncated mixture pdf.
double mixture_pdf(const DensitySpec& spec, std::span<const double> x);

/// Untruncated mixture mass inside the box [lo, hi], computed from the
/// closed-form per-axis CDFs.
double mixture_mass(const DensitySpec& spec, std::span<const double> lo, std::span<const double> hi);

struct SamplingOptions {
  /// Rejected draws allowed per accepted point before giving up.
  std::size_t max_attempts_per_point = 10000;
};

PointCloud sample_density(const DensitySpec& spec, std::size_t m, CounterRng rng,
                          const SamplingOptions& options = {});
PointCloud sample_density(const DensitySpec& spec, std::size_t m, std::uint64_t seed,
                          const SamplingOptions& options = {});

/// pdf at every pixel center, rescaled so the grid integrates to one.
GroundTruthGrid eval_density(const DensitySpec& spec, const PixelGrid& grid);

/// ||v - v_m||_2 / ||v||_2.
double relative_error(std::span<const double> v, std::span<const double> v_m);

/// Equal-weight isotropic Gaussian mixture whose means are drawn uniformly
/// from the integer meshgrid {1..extent}^2 of the domain [0, extent]^2.
DensitySpec random_gaussian_mixture(std::size_t count, double sigma, double extent, CounterRng rng);

}  // namespace raden
