#pragma once

// Density of the compound Poisson marginal L_t with Levy measure
// nu(dz) = exp(-f(|z|)) dz of mass a. Time is the process time of L, so the
// jump count is Poisson(a t) and
//   mu_t(x) = sum_m exp(-a t) t^m / m! nu^{*m}(x),
// which is the same as intensity a t with the normalized exponent f + ln a.

#include <memory>

#include "convdens.hpp"
#include "gsolver.hpp"

namespace levybridge {

struct MarginalOptions {
  /// Largest radius at which the density is evaluated.
  double r_max = 20.0;
  /// Truncation order override; 0 chooses it automatically.
  int m_cap = 0;
  /// Relative size of the dropped Poisson tail that is tolerated at r_max.
  double truncation_tolerance = 1e-12;
  double spacing = 0.0;
  int workers = 0;
};

struct MarginalValue {
  double log_density;
  /// Order of the largest Poisson term (0 when every term underflows).
  int dominant_m;
};

struct TailEstimate {
  double log_tail;
  double lower;
  double upper;
  /// Bounds with the opposite sign in front of (1 -+ delta)/g, kept for comparison.
  double lower_plus_sign;
  double upper_plus_sign;
};

class MarginalDensity {
public:
  MarginalDensity(RVFunction fun, int dim, double t, const MarginalOptions& options = {});
  /// Shares an existing table; it is extended in place if more orders are needed.
  MarginalDensity(std::shared_ptr<ConvolutionTable> table, double t, const MarginalOptions& options = {});

  const RVFunction& fun() const noexcept { return table_->fun(); }
  int dim() const noexcept { return table_->dim(); }
  double time() const noexcept { return t_; }
  double jump_mass() const noexcept { return mass_; }
  double intensity() const noexcept { return mass_ * t_; }
  int m_cap() const noexcept { return m_cap_; }
  double r_max() const noexcept { return r_max_; }
  const std::shared_ptr<ConvolutionTable>& table() const noexcept { return table_; }

  /// Log of P(N = m) nu^{*m}(x) / a^m at |x| = r, i.e. one Poisson term.
  double log_term(int m, double r) const;
  MarginalValue eval(double r) const;
  /// Log of the atom exp(-a t) at the origin.
  double log_atom() const noexcept { return -intensity(); }
  /// Log of the rigorous bound on the dropped terms m > m_cap (valid at every r).
  double log_truncation_bound() const noexcept { return log_truncation_; }

  /// ln P(|L_t| > lambda) by radial quadrature of the retained mixture.
  double log_tail(double lambda) const;

private:
  void choose_cap(const MarginalOptions& options);

  std::shared_ptr<ConvolutionTable> table_;
  double t_;
  double mass_;
  double r_max_;
  int m_cap_ = 0;
  double log_truncation_ = 0.0;
};

struct LogSandwich {
  double lower;
  double upper;
};

/// -r (f'(g) - (1 -+ delta)/g) with g = g(r/t) from the main equation for the raw f.
LogSandwich exponential_density_bounds(const GSolver& general, double r, double t, double delta);

/// Tail value with both sign conventions for the bounds.
TailEstimate tail_estimate(const MarginalDensity& md, const GSolver& general, double lambda, double delta);

/// Analytic evaluation for radii far beyond any grid: each nu^{*m} is replaced
/// by its equal-split Laplace form, and the Poisson sum by its saddle point.
/// ln mu_t(r) = -a t + r * rate + remainder, where rate is the maximum over
/// u = m/r of u (1 - ln(u r/t) - f(1/u) + c(1/u)/2) and is attained at
/// u = 1/g_0(r/t).
struct SaddleMarginal {
  double log_density;
  double rate;
  double remainder;
  double dominant_order;
};

SaddleMarginal saddle_log_marginal(const GSolver& auxiliary, double mass, double r, double t);

/// ln(Gamma(m + 1)) - m ln m + m, accurate for large m.
double stirling_remainder(double m);

}  // namespace levybridge
