#pragma once

// Speed function, entropy rate functionals on the segment [[0, x]], the
// scaled bridge log-density defect and the standardized jump statistics.

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bridge.hpp"
#include "gsolver.hpp"

namespace levybridge {

struct RateEvaluation {
  double value = std::numeric_limits<double>::infinity();
  bool admissible = false;
  std::vector<std::string> violations;
};

struct PathKnot {
  double time;
  std::vector<double> point;
};

/// S(eps) = eps g(1 / (eps r_eps)). Throws DomainError below the solver floor.
double speed_function(const BridgeConfig& cfg, Variant variant = Variant::General);

/// Entropy rate of a piecewise linear path. Knots must start at (0, 0), end at
/// (T, x) and have strictly increasing times.
RateEvaluation path_rate(const BridgeConfig& cfg, std::span<const PathKnot> knots);

/// Rate of passing through points[i] at times[i], 0 < times strictly increasing < T.
RateEvaluation finite_dim_rate(const BridgeConfig& cfg, std::span<const double> times,
                               std::span<const std::vector<double>> points);

struct LimitDefect {
  /// -S ln(bar mu) minus the rate; -S ln(bar mu) itself when the rate is infinite.
  double value;
  double scaled_log_density;
  RateEvaluation rate;
};

/// Distance of -S(eps) ln(bar mu_t(y)) from its limit, through the analytic
/// bridge density. Requires T = 1.
LimitDefect scaled_bridge_logdensity_defect(const BridgeConfig& cfg, double t, std::span<const double> y);

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;
  double mean_stderr = 0.0;
};

struct JumpStatistics {
  /// |x| / (eps g), the predicted jump count.
  double m_center;
  /// alpha eps g |ln eps| / |x|.
  double k_scale;
  /// alpha eps g / |x|, the short form without the logarithmic factor.
  double k_scale_short;
  double speed;
  /// g(|x| / (eps r_eps T)).
  double g;
  std::vector<double> standardized_counts;
  /// One standardized first jump per path with at least one jump.
  std::vector<std::vector<double>> standardized_increments;

  SampleMoments counts;
  std::vector<SampleMoments> increments;
  double mean_count;
  double mean_jump_norm;
  /// Variance of the raw first jump along x and, averaged, across it.
  double raw_variance_along;
  double raw_variance_across;
  /// mean count times mean |W_1| divided by |x| / eps.
  double balance;
};

struct JumpScales {
  double g;
  double m_center;
  double k_scale;
  double k_scale_short;
};

JumpScales jump_scales(const BridgeConfig& cfg);

/// Throws std::invalid_argument for an empty collection.
JumpStatistics jump_statistics(const BridgeConfig& cfg, std::span<const BridgePath> paths);

struct DtildeRatios {
  double q;
  double d_alpha;
  /// ln of d_alpha (ln(1/eps) / q) / eps.
  double log_dtilde;
  double g;
  /// dtilde / (eps^-1 (f'(g) + 1/g)) and dtilde / (eps^-1 f'(g)).
  double ratio_with_correction;
  double ratio_leading;
};

/// Consistency of the tail exponent with the classical d_alpha form, at Lambda = 1/eps and t = r_eps T.
DtildeRatios dtilde_consistency(const BridgeConfig& cfg);
/// The same with eps given through ln(1/eps), for eps below the double range.
DtildeRatios dtilde_consistency(const RVFunction& fun, int dim, double log_inv_eps, double time);

/// Sum in a fixed pairwise order, independent of how the caller parallelizes.
double pairwise_sum(std::span<const double> values);

}  // namespace levybridge
