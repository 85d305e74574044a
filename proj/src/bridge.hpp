#pragma once

// The compound Poisson bridge: L run for time r_eps T and conditioned on
// eps L_{r_eps T} = x. Sampling draws the jump count from its conditional law,
// then the jumps one at a time from their conditional densities, with the last
// jump fixed by the endpoint.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "marginal.hpp"
#include "rng.hpp"

namespace levybridge {

struct BridgeConfig {
  RVFunction fun{2.0};
  int dim = 1;
  double epsilon = 0.02;
  double rho = 0.0;
  /// Overrides r_eps = eps^(-rho) when set.
  std::optional<double> r_eps;
  double horizon = 1.0;
  std::vector<double> endpoint{1.0};
  std::uint64_t seed = 0;

  double time_scale() const { return r_eps ? *r_eps : std::pow(epsilon, -rho); }
  double endpoint_norm() const;
  /// |x| / eps, the radius the unscaled process has to reach.
  double scaled_radius() const { return endpoint_norm() / epsilon; }
  /// r_eps T, the time the unscaled process runs.
  double total_time() const { return time_scale() * horizon; }
  /// Throws std::invalid_argument on inconsistent fields.
  void validate() const;
};

struct BridgeNumerics {
  double spacing = 0.0;
  int m_cap = 0;
  int workers = 0;
};

struct BridgePath {
  std::uint64_t sample = 0;
  /// Increasing times in (0, T].
  std::vector<double> jump_times;
  /// Jumps of the unscaled process; they sum to x / eps.
  std::vector<std::vector<double>> jumps;
  /// "rejection", or "metropolis" if any jump needed the fallback chain.
  std::string method_flag = "rejection";

  int count() const noexcept { return static_cast<int>(jumps.size()); }
};

/// Log masses of the two atoms of Y_t = eps L_{r_eps t} under the bridge law.
struct BridgeAtoms {
  double log_at_origin;
  double log_at_endpoint;
};

class BridgeModel {
public:
  explicit BridgeModel(BridgeConfig config, const BridgeNumerics& numerics = {});

  const BridgeConfig& config() const noexcept { return config_; }
  const MarginalDensity& marginal() const noexcept { return *marginal_; }
  const std::shared_ptr<ConvolutionTable>& table() const noexcept { return table_; }
  int m_cap() const noexcept { return marginal_->m_cap(); }
  /// ln(r_eps T) / ln(|x| / eps): the time window exponent witnessed by this configuration.
  double window_exponent() const noexcept { return window_exponent_; }
  double log_marginal_at_endpoint() const noexcept { return log_endpoint_density_; }

  /// ln P(N = m | eps L_{r_eps T} = x), m >= 1; -inf beyond the truncation order.
  double count_log_pmf(int m) const;

  BridgePath sample(std::uint64_t index) const;
  /// Samples first .. first + count - 1, ordered by index and independent of the worker count.
  std::vector<BridgePath> sample_many(std::uint64_t first, std::size_t count, int workers = 0) const;

  /// ln of the absolutely continuous part of the law of Y_t at y, using the grid.
  /// May extend the shared table, so it must not run concurrently with sampling.
  double marginal_logdensity(double t, std::span<const double> y);
  BridgeAtoms atoms(double t);

private:
  struct Slice {
    std::unique_ptr<MarginalDensity> before;
    std::unique_ptr<MarginalDensity> after;
  };
  const Slice& slice(double t);
  std::vector<double> draw_jump(std::span<const double> target, int remaining,
                                RandomStream& rng, bool& used_fallback) const;

  BridgeConfig config_;
  BridgeNumerics numerics_;
  std::shared_ptr<ConvolutionTable> table_;
  std::unique_ptr<MarginalDensity> marginal_;
  double log_endpoint_density_ = 0.0;
  double window_exponent_ = 0.0;
  std::vector<double> count_cdf_;
  std::vector<std::pair<double, Slice>> slices_;
};

/// Analytic bridge log-density for radii far beyond any grid. The value is
/// rate_sum / eps + remainder: rate_sum collects the per-radius saddle rates
/// |y| M(y) + |x - y| M(x - y) - |x| M(x), which carry the leading order, and is
/// kept separate so that -S(eps) times the log-density can be formed without
/// cancellation.
struct SaddleBridgeDensity {
  double log_density;
  double rate_sum;
  double remainder;
};

SaddleBridgeDensity saddle_bridge_logdensity(const BridgeConfig& config, double t,
                                             std::span<const double> y);

}  // namespace levybridge
