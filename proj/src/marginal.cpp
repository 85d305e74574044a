#include "marginal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "errors.hpp"

namespace levybridge {

using numerics::kNegInf;
using numerics::kPi;

namespace {

double log_poisson_pmf(int m, double lambda) {
  return -lambda + m * std::log(lambda) - numerics::log_factorial(m);
}

// ln P(N > M) for N ~ Poisson(lambda), bounded by a geometric tail beyond M + 1.
double log_poisson_tail_bound(int cap, double lambda) {
  const double ratio = lambda / (cap + 2.0);
  if (ratio >= 1.0) return 0.0;
  return log_poisson_pmf(cap + 1, lambda) - std::log1p(-ratio);
}

}  // namespace

MarginalDensity::MarginalDensity(RVFunction fun, int dim, double t, const MarginalOptions& options)
    : MarginalDensity(std::make_shared<ConvolutionTable>(
                          std::move(fun), dim, 1,
                          ConvolutionOptions{options.r_max, options.spacing, options.workers}),
                      t, options) {}

MarginalDensity::MarginalDensity(std::shared_ptr<ConvolutionTable> table, double t,
                                 const MarginalOptions& options)
    : table_(std::move(table)), t_(t), r_max_(options.r_max) {
  if (!table_) throw std::invalid_argument("marginal density needs a convolution table");
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("time must be positive");
  if (r_max_ > table_->r_max()) {
    throw DomainError("r_max exceeds the convolution grid", table_->r_max());
  }
  mass_ = jump_measure_mass(table_->fun(), table_->dim());
  choose_cap(options);
}

void MarginalDensity::choose_cap(const MarginalOptions& options) {
  const RVFunction& f = table_->fun();
  const double log_sup_jump = -f.f(f.domain_floor()) - std::log(mass_);
  const double lambda = intensity();
  if (options.m_cap > 0) {
    m_cap_ = options.m_cap;
    if (table_->max_order() < m_cap_) table_->extend(m_cap_);
    log_truncation_ = log_poisson_tail_bound(m_cap_, lambda) + log_sup_jump;
    return;
  }
  int cap = 16;
  try {
    GSolver general({f, table_->dim(), Variant::General, {}});
    const double g = general.solve(std::log(r_max_ / t_));
    cap = std::max(cap, static_cast<int>(std::ceil(4.0 * r_max_ / g)));
  } catch (const DomainError&) {
  }
  const double log_tol = std::log(options.truncation_tolerance);
  for (;;) {
    m_cap_ = cap;
    if (table_->max_order() < cap) table_->extend(cap);
    log_truncation_ = log_poisson_tail_bound(cap, lambda) + log_sup_jump;
    const double retained = eval(r_max_).log_density;
    if (retained != kNegInf && log_truncation_ <= log_tol + retained) return;
    if (cap > 100000) throw NumericFailure("Poisson truncation did not converge");
    cap = static_cast<int>(std::ceil(1.25 * cap)) + 1;
  }
}

double MarginalDensity::log_term(int m, double r) const {
  const double level = table_->log_density(m, r);
  if (level == kNegInf) return kNegInf;
  return -intensity() + m * std::log(t_) - numerics::log_factorial(m) + level;
}

MarginalValue MarginalDensity::eval(double r) const {
  r = std::abs(r);
  if (r > table_->grid_extent()) {
    throw DomainError("radius " + std::to_string(r) + " is beyond the convolution grid",
                      table_->grid_extent());
  }
  std::vector<double> terms(static_cast<std::size_t>(m_cap_));
  int best = 0;
  double best_value = kNegInf;
  for (int m = 1; m <= m_cap_; ++m) {
    const double v = log_term(m, r);
    terms[static_cast<std::size_t>(m - 1)] = v;
    if (v > best_value) {
      best_value = v;
      best = m;
    }
  }
  if (best == 0) return {kNegInf, 0};
  return {numerics::log_sum_exp(terms), best};
}

double MarginalDensity::log_tail(double lambda) const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("tail threshold must be nonnegative");
  const double edge = table_->grid_extent();
  if (lambda > edge) throw DomainError("tail threshold beyond the convolution grid", edge);
  const int n = dim();
  numerics::LogIntegralOptions opts;
  opts.probes = 64;
  const double radial = numerics::log_integrate(
      [&](double r) {
        if (r <= 0.0 && n > 1) return kNegInf;
        return (n - 1) * std::log(r) + eval(r).log_density;
      },
      lambda, edge, opts);
  return std::log(numerics::sphere_area(n)) + radial;
}

LogSandwich exponential_density_bounds(const GSolver& general, double r, double t, double delta) {
  if (!(r > 0.0) || !(t > 0.0)) throw std::invalid_argument("radius and time must be positive");
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");
  const double g = general.solve(std::log(r / t));
  const double slope = general.spec().fun.derivative(g, 1);
  return {-r * (slope - (1.0 - delta) / g), -r * (slope - (1.0 + delta) / g)};
}

TailEstimate tail_estimate(const MarginalDensity& md, const GSolver& general, double lambda,
                           double delta) {
  const LogSandwich corrected = exponential_density_bounds(general, lambda, md.time(), delta);
  const double g = general.solve(std::log(lambda / md.time()));
  const double slope = general.spec().fun.derivative(g, 1);
  return {md.log_tail(lambda), corrected.lower, corrected.upper,
          -lambda * (slope + (1.0 + delta) / g), -lambda * (slope + (1.0 - delta) / g)};
}

double stirling_remainder(double m) {
  if (m <= 0.0) return 0.0;
  if (m < 20.0) return std::lgamma(m + 1.0) - m * std::log(m) + m;
  const double inv = 1.0 / m, inv2 = inv * inv;
  return 0.5 * std::log(2.0 * kPi * m) + inv / 12.0 - inv * inv2 / 360.0 + inv * inv2 * inv2 / 1260.0;
}

SaddleMarginal saddle_log_marginal(const GSolver& auxiliary, double mass, double r, double t) {
  if (!(r > 0.0) || !(t > 0.0)) throw std::invalid_argument("radius and time must be positive");
  const RVFunction& f = auxiliary.spec().fun;
  const double n = auxiliary.spec().dim;
  // The ratio is formed before the log so equal ratios give bitwise equal results.
  const double log_lambda = std::log(r / t);
  const double g0 = auxiliary.solve(log_lambda);
  const double log_alpha_term = (n - 1.0) * std::log(f.alpha() - 1.0);
  // Gaussian normalization per jump of the equal-split Laplace approximation.
  auto c = [&](double v) { return n * std::log(2.0 * kPi / f.derivative_unchecked(v, 2)) + log_alpha_term; };
  auto psi = [&](double u) {
    const double v = 1.0 / u;
    return u * (1.0 - (log_lambda + std::log(u)) - f.f(v) + 0.5 * c(v));
  };
  const double u0 = 1.0 / g0;
  const double rate = psi(u0);
  const double curvature = auxiliary.lhs_derivative(g0) * g0 * g0;
  const double m0 = r * u0;
  const double intensity = mass * t;

  double log_density;
  if (m0 <= 1e6) {
    const double width = std::sqrt(r / curvature);
    const double span = std::max(20.0, 12.0 * width);
    const auto lo = static_cast<long long>(std::max(1.0, std::floor(m0 - span)));
    const auto hi = static_cast<long long>(std::ceil(m0 + span));
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (long long m = lo; m <= hi; ++m) {
      const double md = static_cast<double>(m);
      const double v = r / md;
      if (!(v > f.convexity_threshold())) continue;
      terms.push_back(-intensity + md * std::log(t) - std::lgamma(md + 1.0) - md * f.f(v) +
                      0.5 * (md - 1.0) * c(v) - 0.5 * n * std::log(md));
    }
    log_density = numerics::log_sum_exp(terms);
  } else {
    // Poisson sum replaced by its Gaussian integral around m0.
    const double e = -0.5 * c(g0) - 0.5 * n * std::log(m0) - stirling_remainder(m0);
    log_density = -intensity + r * rate + e + 0.5 * std::log(2.0 * kPi * r / curvature);
  }
  return {log_density, rate, log_density + intensity - r * rate, m0};
}

}  // namespace levybridge
