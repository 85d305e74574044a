#pragma once

// Solutions g(Lambda) of y f'(y) - f(y) + k(y) = ln Lambda for the correction
// terms k used in the density estimates. Everything is parametrized by
// ln Lambda, so Lambda far beyond the double range is representable.

#include <map>
#include <mutex>
#include <string>

#include "rvfun.hpp"

namespace levybridge {

enum class Variant { Simplified, General, GZero, CustomK };

Variant parse_variant(const std::string& name);
std::string variant_name(Variant v);

/// k(y) = log_y ln y + log_fpp ln f''(y) + curvature y f'''(y) / f''(y) + constant.
struct CorrectionTerm {
  double log_y = 0.0;
  double log_fpp = 0.0;
  double curvature = 0.0;
  double constant = 0.0;
};

struct EquationSpec {
  RVFunction fun;
  int dim = 1;
  Variant variant = Variant::General;
  CorrectionTerm custom;
};

struct SimplifiedConstants {
  double c1, c2, c3;
};

/// Constants of g^alpha + C1 ln g = C2 + C3 ln Lambda (pure power, unit scale).
SimplifiedConstants simplified_constants(double alpha, int dim);

/// Limit of g(Lambda) / (ln Lambda)^(1/alpha), namely (alpha - 1)^(-1/alpha).
double asymptotic_g_limit(double alpha);

struct LimitRatios {
  double log_derivative;  // g'(Lambda) Lambda ln Lambda / g
  double f_ratio;         // f(g) / ln Lambda
  double fprime_ratio;    // g f'(g) / ln Lambda
  double legendre_ratio;  // (g f'(g) - f(g)) / ln Lambda

  static LimitRatios targets(double alpha) {
    return {1.0 / alpha, 1.0 / (alpha - 1.0), alpha / (alpha - 1.0), 1.0};
  }
};

class GSolver {
public:
  explicit GSolver(EquationSpec spec);
  GSolver(const GSolver& other);

  const EquationSpec& spec() const noexcept { return spec_; }
  /// The correction term in effect (derived from the variant unless CUSTOM_K).
  const CorrectionTerm& correction() const noexcept { return k_; }

  /// ln Lambda_0: solutions are defined for ln Lambda >= floor.
  double log_lambda_floor() const noexcept { return log_floor_; }
  /// Smallest y from which the left-hand side is strictly increasing.
  double y_min() const noexcept { return y_min_; }

  /// Left-hand side H(y) of H(y) = ln Lambda, and H'(y).
  double lhs(double y) const;
  double lhs_derivative(double y) const;

  double residual(double log_lambda, double g) const { return lhs(g) - log_lambda; }

  /// Root g of H(g) = log_lambda. Throws DomainError below the floor.
  double solve(double log_lambda) const;
  /// Root without the node cache.
  double solve_uncached(double log_lambda) const;

  /// dg/d ln Lambda by implicit differentiation.
  double dg_dlog_lambda(double log_lambda) const;

  LimitRatios limit_diagnostics(double log_lambda) const;

  /// g(Lambda) [f'(g(y Lambda)) - f'(g(Lambda))] - ln y for y in
  /// [(ln Lambda)^-gamma, (ln Lambda)^gamma].
  double cancellation_defect(double log_lambda, double y, double gamma = 1.0) const;

private:
  double solve_in_bracket(double log_lambda, double lo, double hi) const;
  double cached_node(int k) const;

  EquationSpec spec_;
  CorrectionTerm k_;
  SimplifiedConstants simplified_{};
  double y_min_ = 0.0;
  double log_floor_ = 0.0;

  mutable std::mutex cache_mutex_;
  mutable std::map<int, double> cache_;
};

/// g_0(Lambda) (f'(g_0) - f'(g_1)) for two equations sharing f and n; it tends to
/// lim (k_1 - k_0).
double sensitivity_gap(const GSolver& spec0, const GSolver& spec1, double log_lambda);

}  // namespace levybridge
