#include "gsolver.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace levybridge {

namespace {

constexpr double kCacheRatio = 1.05;

}  // namespace

Variant parse_variant(const std::string& name) {
  if (name == "simplified" || name == "SIMPLIFIED") return Variant::Simplified;
  if (name == "general" || name == "GENERAL") return Variant::General;
  if (name == "g-zero" || name == "g_zero" || name == "G_ZERO" || name == "gzero") return Variant::GZero;
  if (name == "custom-k" || name == "custom_k" || name == "CUSTOM_K") return Variant::CustomK;
  throw std::invalid_argument("unknown variant: " + name);
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Simplified: return "simplified";
    case Variant::General: return "general";
    case Variant::GZero: return "g-zero";
    case Variant::CustomK: return "custom-k";
  }
  return "general";
}

SimplifiedConstants simplified_constants(double alpha, int dim) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
  if (dim < 1) throw std::invalid_argument("dimension must be positive");
  const double n = dim;
  return {(2.0 - (alpha - 2.0) * n) / (2.0 * (alpha - 1.0)),
          (std::log(alpha - 1.0) + n * std::log(alpha) - n * std::log(2.0 * numerics::kPi)) /
              (2.0 * (alpha - 1.0)),
          1.0 / (alpha - 1.0)};
}

double asymptotic_g_limit(double alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
  return std::pow(alpha - 1.0, -1.0 / alpha);
}

GSolver::GSolver(EquationSpec spec) : spec_(std::move(spec)) {
  const double alpha = spec_.fun.alpha();
  const double n = spec_.dim;
  if (spec_.dim < 1) throw std::invalid_argument("dimension must be positive");
  const double base = 0.5 * n * std::log(2.0 * numerics::kPi) + 0.5 * (n - 1.0) * std::log(alpha - 1.0);
  switch (spec_.variant) {
    case Variant::Simplified:
      if (!spec_.fun.pure_power() || spec_.fun.scale() != 1.0 || spec_.fun.domain_floor() != 0.0) {
        throw std::invalid_argument("the simplified equation needs f(x) = x^alpha");
      }
      simplified_ = simplified_constants(alpha, spec_.dim);
      k_ = {1.0, -0.5 * n, 0.0, base};
      break;
    case Variant::General: k_ = {1.0, -0.5 * n, 0.0, base}; break;
    case Variant::GZero: k_ = {1.0, -0.5 * n, 0.5 * n, base}; break;
    case Variant::CustomK: k_ = spec_.custom; break;
  }

  // Scan a log grid for the last point where H fails to increase.
  const double start = std::max({1e-4, spec_.fun.domain_floor() * 1.0001,
                                 spec_.fun.convexity_threshold() * 1.0001});
  y_min_ = start;
  for (double y = start; y <= 1e7; y *= 1.01) {
    const double d = lhs_derivative(y);
    if (!(d > 0.0)) y_min_ = y * 1.01;
  }
  if (!(y_min_ < 1e7)) throw DomainError("functional equation is not increasing on the scanned range");
  log_floor_ = lhs(y_min_) + 2.0;
}

GSolver::GSolver(const GSolver& other)
    : spec_(other.spec_),
      k_(other.k_),
      simplified_(other.simplified_),
      y_min_(other.y_min_),
      log_floor_(other.log_floor_) {}

double GSolver::lhs(double y) const {
  const auto& f = spec_.fun;
  if (spec_.variant == Variant::Simplified) {
    const double a = f.alpha();
    return (a - 1.0) * (std::pow(y, a) + simplified_.c1 * std::log(y) - simplified_.c2);
  }
  const double f1 = f.derivative_unchecked(y, 1);
  const double f2 = f.derivative_unchecked(y, 2);
  double value = y * f1 - f.f(y) + k_.log_y * std::log(y) + k_.constant;
  if (k_.log_fpp != 0.0) value += k_.log_fpp * std::log(f2);
  if (k_.curvature != 0.0) value += k_.curvature * y * f.derivative_unchecked(y, 3) / f2;
  return value;
}

double GSolver::lhs_derivative(double y) const {
  const auto& f = spec_.fun;
  if (spec_.variant == Variant::Simplified) {
    const double a = f.alpha();
    return (a - 1.0) * (a * std::pow(y, a - 1.0) + simplified_.c1 / y);
  }
  const double f2 = f.derivative_unchecked(y, 2);
  const double f3 = f.derivative_unchecked(y, 3);
  double value = y * f2 + k_.log_y / y;
  if (k_.log_fpp != 0.0) value += k_.log_fpp * f3 / f2;
  if (k_.curvature != 0.0) {
    const double f4 = f.derivative_unchecked(y, 4);
    value += k_.curvature * (f3 / f2 + y * (f4 * f2 - f3 * f3) / (f2 * f2));
  }
  return value;
}

double GSolver::solve_in_bracket(double log_lambda, double lo, double hi) const {
  while (hi - lo > 1e-13 * hi) {
    const double mid = hi > 4.0 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (lhs(mid) < log_lambda) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double y = 0.5 * (lo + hi);
  for (int step = 0; step < 3; ++step) {
    const double next = y - residual(log_lambda, y) / lhs_derivative(y);
    if (!(next > 0.0) || !std::isfinite(next)) break;
    y = next;
  }
  return y;
}

double GSolver::solve_uncached(double log_lambda) const {
  if (!std::isfinite(log_lambda)) throw std::invalid_argument("log Lambda must be finite");
  if (log_lambda < log_floor_) {
    throw DomainError("log Lambda " + std::to_string(log_lambda) + " is below the solvability floor " +
                          std::to_string(log_floor_),
                      log_floor_);
  }
  double lo = y_min_;
  double hi = std::max(2.0 * lo, 1.0);
  while (lhs(hi) < log_lambda) {
    lo = hi;
    hi *= 2.0;
  }
  const double g = solve_in_bracket(log_lambda, lo, hi);
  if (!(std::abs(residual(log_lambda, g)) <= 1e-10 * std::max(std::abs(log_lambda), 1e-300) ||
        std::abs(residual(log_lambda, g)) <= 1e-13)) {
    throw NumericFailure("g solve residual too large at log Lambda " + std::to_string(log_lambda));
  }
  return g;
}

double GSolver::cached_node(int k) const {
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(k); it != cache_.end()) return it->second;
  }
  const double g = solve_uncached(std::pow(kCacheRatio, k));
  std::lock_guard lock(cache_mutex_);
  cache_.emplace(k, g);
  return g;
}

double GSolver::solve(double log_lambda) const {
  if (!std::isfinite(log_lambda)) throw std::invalid_argument("log Lambda must be finite");
  const double lowest_node = std::max(1.0, log_floor_ + 1.0);
  if (!(log_lambda > lowest_node * kCacheRatio * kCacheRatio)) return solve_uncached(log_lambda);

  const int k = static_cast<int>(std::floor(std::log(log_lambda) / std::log(kCacheRatio)));
  std::vector<double> xs, ys;
  for (int j = k - 1; j <= k + 2; ++j) {
    xs.push_back(std::log(std::pow(kCacheRatio, j)));
    ys.push_back(cached_node(j));
  }
  const double guess = numerics::MonotoneCubic(xs, ys)(std::log(log_lambda));
  // Accept the interpolant only as a bracket seed; the root is always re-solved.
  for (double width = 1e-6; width < 1e-1; width *= 100.0) {
    const double lo = guess * (1.0 - width), hi = guess * (1.0 + width);
    if (lo > y_min_ && lhs(lo) < log_lambda && lhs(hi) >= log_lambda) {
      const double g = solve_in_bracket(log_lambda, lo, hi);
      if (std::abs(residual(log_lambda, g)) <= 1e-10 * std::abs(log_lambda)) return g;
      break;
    }
  }
  return solve_uncached(log_lambda);
}

double GSolver::dg_dlog_lambda(double log_lambda) const {
  const double g = solve(log_lambda);
  return 1.0 / lhs_derivative(g);
}

LimitRatios GSolver::limit_diagnostics(double log_lambda) const {
  const double g = solve(log_lambda);
  const auto& f = spec_.fun;
  const double f0 = f.f(g), f1 = f.derivative_unchecked(g, 1);
  return {log_lambda / (g * lhs_derivative(g)), f0 / log_lambda, g * f1 / log_lambda,
          (g * f1 - f0) / log_lambda};
}

double GSolver::cancellation_defect(double log_lambda, double y, double gamma) const {
  if (!(y > 0.0)) throw std::invalid_argument("y must be positive");
  if (!(log_lambda > 1.0)) throw std::invalid_argument("log Lambda must exceed 1 for the window");
  const double edge = gamma * std::log(log_lambda);
  if (std::abs(std::log(y)) > edge * (1.0 + 1e-12)) {
    throw std::invalid_argument("y lies outside [(ln Lambda)^-gamma, (ln Lambda)^gamma]");
  }
  if (y == 1.0) return 0.0;
  const double g = solve(log_lambda);
  const double gy = solve(log_lambda + std::log(y));
  const auto& f = spec_.fun;
  return g * (f.derivative_unchecked(gy, 1) - f.derivative_unchecked(g, 1)) - std::log(y);
}

double sensitivity_gap(const GSolver& s0, const GSolver& s1, double log_lambda) {
  const auto& a = s0.spec();
  const auto& b = s1.spec();
  if (a.dim != b.dim || a.fun.alpha() != b.fun.alpha() || a.fun.scale() != b.fun.scale() ||
      a.fun.beta() != b.fun.beta() || a.fun.domain_floor() != b.fun.domain_floor()) {
    throw std::invalid_argument("sensitivity gap needs equations with the same f and dimension");
  }
  const double g0 = s0.solve(log_lambda);
  const double g1 = s1.solve(log_lambda);
  if (g0 == g1) return 0.0;
  return g0 * (a.fun.derivative_unchecked(g0, 1) - a.fun.derivative_unchecked(g1, 1));
}

}  // namespace levybridge
