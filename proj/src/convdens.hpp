#pragma once

// Radial log-densities F_m(r) = ln(d nu^{*m}/dx) at |x| = r for the raw jump
// measure nu(dz) = exp(-f(|z|)) dz, tabulated on one uniform grid for all
// orders m = 1..M. Levels are built by F_{m+1} = nu * F_m in the log domain.

#include <memory>
#include <vector>

#include "numerics.hpp"
#include "rvfun.hpp"

namespace levybridge {

struct ConvolutionOptions {
  /// Largest radius at which values are guaranteed; the grid is padded beyond it.
  double r_max = 20.0;
  /// Grid spacing; 0 picks min(0.05, 0.2 (f''/2)^(-1/2)) over [1, r_max/2].
  double spacing = 0.0;
  /// Worker threads for the per-node quadratures (0 = default).
  int workers = 0;
};

class ConvolutionTable {
public:
  ConvolutionTable(RVFunction fun, int dim, int max_order, const ConvolutionOptions& options = {});

  const RVFunction& fun() const noexcept { return fun_; }
  int dim() const noexcept { return dim_; }
  int max_order() const noexcept { return static_cast<int>(levels_.size()); }
  double r_max() const noexcept { return r_max_; }
  double spacing() const noexcept { return h_; }
  /// Radius up to which the stored grid extends (r_max plus padding).
  double grid_extent() const noexcept { return levels_.front().r_max(); }

  /// ln nu^{*m} density at radius r; -inf beyond the grid or when underflowed.
  double log_density(int m, double r) const;
  const numerics::UniformRadialGrid& level(int m) const;

  /// Appends orders up to max_order. Not safe concurrently with readers.
  void extend(int max_order);

  /// One quadrature of nu against level m, evaluated at radius r.
  double convolve_level(int m, double r) const { return convolve(m == 1 ? nullptr : &level(m), r); }

private:
  double convolve(const numerics::UniformRadialGrid* previous, double r) const;
  double previous_value(const numerics::UniformRadialGrid* previous, double d) const;
  double cutoff_distance(const numerics::UniformRadialGrid* previous, double lo, double hi,
                         double level) const;
  double log_angular(const numerics::UniformRadialGrid* previous, double r, double s) const;
  double log_shell(const numerics::UniformRadialGrid* previous, double r, double s) const;

  RVFunction fun_;
  int dim_;
  double r_max_;
  double h_;
  double pad_;
  int workers_;
  std::vector<numerics::UniformRadialGrid> levels_;
};

struct LogBounds {
  double lower;
  double upper;
};

/// Sandwich bounds for ln nu^{*m}(x) at |x| = r:
///   upper = (n-1)(m-1)/2 ln(alpha-1) + n(m-1)/2 ln(2 pi / f''(r/m)) - m (f(r/m) - delta)
///   lower = upper - n/2 ln m - 2 m delta.
LogBounds convolution_power_bounds(const RVFunction& fun, int dim, int m, double r, double delta);

}  // namespace levybridge
