#include "ldp.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "errors.hpp"

namespace levybridge {

namespace {

constexpr double kSegmentTolerance = 1e-9;

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Entropy sum over consecutive knots, or +inf with the reasons when the knots leave
// the segment or move back towards the origin.
RateEvaluation entropy_sum(const BridgeConfig& cfg, std::span<const PathKnot> knots) {
  const auto& x = cfg.endpoint;
  const double len = norm(x);
  const double tol = kSegmentTolerance * len;
  RateEvaluation out;
  bool off = false, backwards = false;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const auto& y = knots[i].point;
    if (y.size() != x.size()) throw std::invalid_argument("knot has the wrong dimension");
    const double theta = dot(y, x) / (len * len);
    double dist2 = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) dist2 += (y[k] - theta * x[k]) * (y[k] - theta * x[k]);
    if (std::sqrt(dist2) > tol || theta * len < -tol || theta * len > len + tol) off = true;
    if (i > 0) {
      if (!(knots[i].time > knots[i - 1].time)) throw std::invalid_argument("knot times must increase strictly");
      if (norm(y) < norm(knots[i - 1].point) - tol) backwards = true;
    }
  }
  if (off) out.violations.emplace_back("off-segment");
  if (backwards) out.violations.emplace_back("non-monotone norm");
  if (off || backwards) return out;

  std::vector<double> pieces;
  pieces.reserve(knots.size());
  for (std::size_t i = 1; i < knots.size(); ++i) {
    std::vector<double> step(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) step[k] = knots[i].point[k] - knots[i - 1].point[k];
    const double d = norm(step);
    if (d > 0.0) pieces.push_back(d * std::log(d / (knots[i].time - knots[i - 1].time)));
  }
  out.value = pairwise_sum(pieces) - len * std::log(len / cfg.horizon);
  out.admissible = true;
  return out;
}

SampleMoments moments(std::span<const double> values) {
  SampleMoments m;
  const double n = static_cast<double>(values.size());
  m.mean = pairwise_sum(values) / n;
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - m.mean) * (values[i] - m.mean);
    m.variance = pairwise_sum(sq) / (n - 1.0);
  }
  m.mean_stderr = std::sqrt(m.variance / n);
  return m;
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double speed_function(const BridgeConfig& cfg, Variant variant) {
  cfg.validate();
  const GSolver solver({cfg.fun, cfg.dim, variant, {}});
  const double log_lambda = -std::log(cfg.epsilon) - std::log(cfg.time_scale());
  return cfg.epsilon * solver.solve(log_lambda);
}

RateEvaluation path_rate(const BridgeConfig& cfg, std::span<const PathKnot> knots) {
  cfg.validate();
  if (knots.size() < 2) throw std::invalid_argument("a path needs at least two knots");
  const auto& first = knots.front();
  const auto& last = knots.back();
  if (first.time != 0.0 || norm(first.point) != 0.0) throw std::invalid_argument("path must start at (0, 0)");
  if (last.time != cfg.horizon || last.point != cfg.endpoint) throw std::invalid_argument("path must end at (T, x)");
  return entropy_sum(cfg, knots);
}

RateEvaluation finite_dim_rate(const BridgeConfig& cfg, std::span<const double> times,
                               std::span<const std::vector<double>> points) {
  cfg.validate();
  if (times.size() != points.size()) throw std::invalid_argument("times and points differ in length");
  std::vector<PathKnot> knots;
  knots.push_back({0.0, std::vector<double>(cfg.endpoint.size(), 0.0)});
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0) || !(times[i] < cfg.horizon)) throw std::invalid_argument("times must lie in (0, T)");
    knots.push_back({times[i], points[i]});
  }
  knots.push_back({cfg.horizon, cfg.endpoint});
  return entropy_sum(cfg, knots);
}

LimitDefect scaled_bridge_logdensity_defect(const BridgeConfig& cfg, double t, std::span<const double> y) {
  if (cfg.horizon != 1.0) throw std::invalid_argument("the density limit is stated for T = 1");
  const auto density = saddle_bridge_logdensity(cfg, t, y);
  const double speed = speed_function(cfg);
  const double g = speed / cfg.epsilon;
  // -S ln(bar mu) with the 1/eps part of the log-density multiplied out first.
  const double scaled = -g * density.rate_sum - speed * density.remainder;
  const std::vector<std::vector<double>> points{std::vector<double>(y.begin(), y.end())};
  const std::array<double, 1> times{t};
  auto rate = finite_dim_rate(cfg, times, points);
  const double value = rate.admissible ? scaled - rate.value : scaled;
  return {value, scaled, std::move(rate)};
}

JumpScales jump_scales(const BridgeConfig& cfg) {
  cfg.validate();
  const GSolver general({cfg.fun, cfg.dim, Variant::General, {}});
  const double radius = cfg.scaled_radius();
  const double g = general.solve(std::log(radius) - std::log(cfg.total_time()));
  const double base = cfg.fun.alpha() / cfg.endpoint_norm() * cfg.epsilon * g;
  return {g, radius / g, base * std::abs(std::log(cfg.epsilon)), base};
}

JumpStatistics jump_statistics(const BridgeConfig& cfg, std::span<const BridgePath> paths) {
  if (paths.empty()) throw std::invalid_argument("no paths to summarize");
  const JumpScales scales = jump_scales(cfg);
  const std::size_t n = cfg.endpoint.size();
  const double len = cfg.endpoint_norm();
  std::vector<double> unit(n);
  for (std::size_t i = 0; i < n; ++i) unit[i] = cfg.endpoint[i] / len;
  const double curvature = std::sqrt(cfg.fun.derivative(scales.g, 2));
  const double across_scale = 1.0 / (cfg.fun.alpha() - 1.0);

  JumpStatistics out{};
  out.m_center = scales.m_center;
  out.k_scale = scales.k_scale;
  out.k_scale_short = scales.k_scale_short;
  out.speed = speed_function(cfg);
  out.g = scales.g;

  std::vector<double> counts, norms, along, across;
  for (const auto& path : paths) {
    if (path.jumps.empty()) continue;
    const double count = static_cast<double>(path.count());
    counts.push_back(count);
    out.standardized_counts.push_back(std::sqrt(scales.k_scale) * (count - scales.m_center));

    const auto& w = path.jumps.front();
    if (w.size() != n) throw std::invalid_argument("path dimension differs from the configuration");
    norms.push_back(norm(w));
    const double raw_along = dot(w, unit);
    along.push_back(raw_along);
    double orth2 = 0.0;
    std::vector<double> bar(n), standard(n);
    for (std::size_t i = 0; i < n; ++i) {
      orth2 += (w[i] - raw_along * unit[i]) * (w[i] - raw_along * unit[i]);
      bar[i] = curvature * (w[i] - scales.g * unit[i]);
    }
    if (n > 1) across.push_back(orth2 / static_cast<double>(n - 1));
    const double bar_along = dot(bar, unit);
    for (std::size_t i = 0; i < n; ++i) {
      standard[i] = bar_along * unit[i] + across_scale * (bar[i] - bar_along * unit[i]);
    }
    out.standardized_increments.push_back(std::move(standard));
  }
  if (counts.empty()) throw std::invalid_argument("no path has a jump");

  out.counts = moments(out.standardized_counts);
  out.increments.resize(n);
  std::vector<double> component(out.standardized_increments.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t s = 0; s < component.size(); ++s) component[s] = out.standardized_increments[s][i];
    out.increments[i] = moments(component);
  }
  out.mean_count = moments(counts).mean;
  out.mean_jump_norm = moments(norms).mean;
  out.raw_variance_along = moments(along).variance;
  // Orthogonal components have mean zero by symmetry, so their mean square is the variance.
  out.raw_variance_across = n > 1 ? moments(across).mean : std::nan("");
  out.balance = out.mean_count * out.mean_jump_norm / cfg.scaled_radius();
  return out;
}

DtildeRatios dtilde_consistency(const RVFunction& fun, int dim, double log_inv_eps, double time) {
  if (!(log_inv_eps > 0.0)) throw std::invalid_argument("eps must be below 1");
  if (!(time > 0.0)) throw std::invalid_argument("time must be positive");
  const double alpha = fun.alpha();
  DtildeRatios out{};
  out.q = fun.inverse(log_inv_eps);
  out.d_alpha = alpha * std::pow(alpha - 1.0, -(1.0 - 1.0 / alpha));
  out.log_dtilde = std::log(out.d_alpha) + std::log(log_inv_eps / out.q) + log_inv_eps;
  const GSolver general({fun, dim, Variant::General, {}});
  out.g = general.solve(log_inv_eps - std::log(time));
  const double slope = fun.derivative(out.g, 1);
  const double reduced = out.d_alpha * log_inv_eps / out.q;
  out.ratio_with_correction = reduced / (slope + 1.0 / out.g);
  out.ratio_leading = reduced / slope;
  return out;
}

DtildeRatios dtilde_consistency(const BridgeConfig& cfg) {
  cfg.validate();
  return dtilde_consistency(cfg.fun, cfg.dim, -std::log(cfg.epsilon), cfg.total_time());
}

}  // namespace levybridge
