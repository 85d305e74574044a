#pragma once

// Small numerical kernels shared by every module: log-domain accumulation,
// peak-aware quadrature of exp(log_f), and interpolation on uniform radial grids.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace levybridge::numerics {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

/// log(sum(exp(v))) with the usual max shift; returns -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> values);

/// log(exp(a) + exp(b)).
double log_add_exp(double a, double b);

/// Adaptive Gauss-Kronrod integral of f over [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10, double* error = nullptr);

struct LogIntegralOptions {
  double rel_tol = 1e-11;
  /// Integrand values below peak - cutoff are treated as zero.
  double cutoff = 60.0;
  /// Number of coarse probes used to locate the peak before refinement.
  int probes = 24;
  /// Points where the integrand may have a kink; quadrature panels split there.
  std::span<const double> breakpoints = {};
};

/// log of the integral of exp(log_f) over [a, b]. log_f may return -inf.
/// The integrand is assumed to be unimodal up to the coarse probe resolution;
/// the peak is refined, the effective support is cut where log_f drops by
/// `cutoff`, and both flanks are integrated adaptively after the peak shift.
double log_integrate(const std::function<double(double)>& log_f, double a, double b,
                     const LogIntegralOptions& options = {});

/// Radial profile sampled at r_j = j * h, j = 0..N-1, interpolated with
/// six-point Lagrange polynomials. The profile is extended evenly to r < 0,
/// which keeps the interpolation exact for even quadratics (Gaussian logs).
class UniformRadialGrid {
public:
  UniformRadialGrid() = default;
  /// Needs at least 6 nodes.
  UniformRadialGrid(double spacing, std::vector<double> values);

  double spacing() const noexcept { return h_; }
  std::size_t size() const noexcept { return values_.size(); }
  double r_max() const noexcept { return h_ * static_cast<double>(values_.size() - 1); }
  double radius(std::size_t j) const noexcept { return h_ * static_cast<double>(j); }
  std::span<const double> values() const noexcept { return values_; }

  /// Interpolated value; -inf outside [0, r_max] or when a stencil node is -inf.
  double operator()(double r) const noexcept;

private:
  double node(std::ptrdiff_t j) const noexcept;

  double h_ = 0.0;
  double inv_h_ = 0.0;
  std::vector<double> values_;
};

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant of y(x) on strictly increasing x.
class MonotoneCubic {
public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y);
  double operator()(double x) const;

private:
  std::vector<double> x_, y_, d_;
};

/// log(m!) via lgamma.
inline double log_factorial(double m) { return std::lgamma(m + 1.0); }

/// Surface area of the unit sphere S^{n-1} in R^n.
double sphere_area(int n);

}  // namespace levybridge::numerics
