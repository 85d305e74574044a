#include "convdens.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "errors.hpp"
#include "parallel.hpp"

namespace levybridge {

using numerics::kNegInf;
using numerics::kPi;

namespace {

// Fixed composite Gauss-Legendre rule. Inner integrals must vary smoothly with
// the outer variable, which an adaptive rule's stopping decisions would break.
template <class F>
double fixed_panels(F&& f, double a, double b) {
  constexpr int kPanels = 2;
  const double width = (b - a) / kPanels;
  double total = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    total += boost::math::quadrature::gauss<double, 20>::integrate(f, a + i * width, a + (i + 1) * width);
  }
  return total;
}

}  // namespace

ConvolutionTable::ConvolutionTable(RVFunction fun, int dim, int max_order,
                                   const ConvolutionOptions& options)
    : fun_(std::move(fun)), dim_(dim), r_max_(options.r_max), workers_(options.workers) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
  if (max_order < 1) throw std::invalid_argument("convolution order must be at least 1");
  if (!(options.r_max > 0.0) || !std::isfinite(options.r_max)) {
    throw std::invalid_argument("r_max must be positive");
  }
  h_ = options.spacing;
  if (h_ <= 0.0) {
    const double hi = std::max(1.0, 0.5 * r_max_);
    const double curvature = std::max(fun_.derivative_unchecked(1.0, 2), fun_.derivative_unchecked(hi, 2));
    h_ = std::min(0.05, 0.2 / std::sqrt(std::max(curvature, 1e-12) / 2.0));
  }
  pad_ = 2.0 * fun_.inverse(fun_.f(fun_.domain_floor()) + 60.0) + 4.0 * h_;
  const auto nodes = static_cast<std::size_t>(std::ceil((r_max_ + pad_) / h_)) + 1;

  std::vector<double> first(std::max<std::size_t>(nodes, 6));
  for (std::size_t j = 0; j < first.size(); ++j) first[j] = -fun_.f(h_ * static_cast<double>(j));
  levels_.emplace_back(h_, std::move(first));
  extend(max_order);
}

double ConvolutionTable::previous_value(const numerics::UniformRadialGrid* previous, double d) const {
  if (!previous) return -fun_.f(d);
  if (d <= previous->r_max()) return (*previous)(d);
  // Quadratic continuation past the padded edge keeps the integrand smooth there.
  const auto v = previous->values();
  const std::size_t n = v.size();
  const double a = v[n - 1], b = v[n - 2], c = v[n - 3];
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) return kNegInf;
  const double u = (d - previous->r_max()) / h_;
  const double slope = 0.5 * (3.0 * a - 4.0 * b + c);
  const double curvature = std::min(a - 2.0 * b + c, 0.0);
  return a + slope * u + 0.5 * curvature * u * u;
}

double ConvolutionTable::convolve(const numerics::UniformRadialGrid* previous, double r) const {
  const double reach = r + pad_;
  const double x0 = fun_.domain_floor();
  const std::array<double, 4> kinks{0.0, r, x0, -x0};
  numerics::LogIntegralOptions outer;
  outer.breakpoints = kinks;

  if (dim_ == 1) {
    outer.rel_tol = 1e-10;
    return numerics::log_integrate(
        [&](double s) { return -fun_.f(std::abs(s)) + previous_value(previous, std::abs(r - s)); },
        -pad_, reach, outer);
  }
  outer.rel_tol = 1e-9;
  if (dim_ == 2) {
    return numerics::log_integrate(
        [&](double s) {
          if (s <= 0.0) return kNegInf;
          const double angular = log_angular(previous, r, s);
          return -fun_.f(s) + std::log(2.0 * s) + angular;
        },
        0.0, reach, outer);
  }
  if (r < 1e-12) {
    return numerics::log_integrate(
        [&](double s) {
          if (s <= 0.0) return kNegInf;
          return -fun_.f(s) + 2.0 * std::log(s) + std::log(4.0 * kPi) + previous_value(previous, s);
        },
        0.0, reach, outer);
  }
  // Three dimensions: the angular integral becomes one over the distance d = |x - y|.
  return numerics::log_integrate(
      [&](double s) {
        if (s <= 0.0) return kNegInf;
        const double shell = log_shell(previous, r, s);
        return -fun_.f(s) + std::log(2.0 * kPi * s / r) + shell;
      },
      0.0, reach, outer);
}

double ConvolutionTable::cutoff_distance(const numerics::UniformRadialGrid* previous, double lo,
                                         double hi, double level) const {
  if (previous_value(previous, hi) >= level) return hi;
  for (int it = 0; it < 40 && hi - lo > 1e-9 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (previous_value(previous, mid) >= level) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

// Levels are radially nonincreasing, so in the angle the integrand peaks at
// theta = 0 and only [0, theta_c] above the cutoff needs quadrature.
double ConvolutionTable::log_angular(const numerics::UniformRadialGrid* previous, double r,
                                     double s) const {
  const double near = std::abs(r - s);
  const double peak = previous_value(previous, near);
  if (peak == kNegInf) return kNegInf;
  if (r * s == 0.0) return peak + std::log(kPi);
  const double d_cut = cutoff_distance(previous, near, r + s, peak - 60.0);
  // acos is ill-conditioned near -1, so the full half-turn is taken exactly.
  const double theta_cut =
      d_cut >= r + s ? kPi
                     : std::acos(std::clamp((r * r + s * s - d_cut * d_cut) / (2.0 * r * s), -1.0, 1.0));
  if (!(theta_cut > 0.0)) return peak + std::log(kPi);
  const double total = fixed_panels(
      [&](double theta) {
        const double d2 = r * r + s * s - 2.0 * r * s * std::cos(theta);
        const double v = previous_value(previous, std::sqrt(std::max(d2, 0.0)));
        return v == kNegInf ? 0.0 : std::exp(v - peak);
      },
      0.0, theta_cut);
  return total > 0.0 ? peak + std::log(total) : kNegInf;
}

// Shell integral over d in [|r - s|, r + s] of exp(G(d)) d.
double ConvolutionTable::log_shell(const numerics::UniformRadialGrid* previous, double r,
                                   double s) const {
  const double near = std::abs(r - s);
  const double peak = previous_value(previous, near);
  if (peak == kNegInf) return kNegInf;
  const double weight = std::max(near, h_);
  const double d_cut = cutoff_distance(previous, near, r + s,
                                       peak - 60.0 - std::log((r + s) / weight));
  if (!(d_cut > near)) return kNegInf;
  const double total = fixed_panels(
      [&](double d) {
        const double v = previous_value(previous, d);
        return v == kNegInf ? 0.0 : std::exp(v - peak) * d;
      },
      near, d_cut);
  return total > 0.0 ? peak + std::log(total) : kNegInf;
}

void ConvolutionTable::extend(int max_order) {
  const std::size_t nodes = levels_.front().size();
  while (static_cast<int>(levels_.size()) < max_order) {
    const numerics::UniformRadialGrid* previous = levels_.size() == 1 ? nullptr : &levels_.back();
    std::vector<double> values(nodes);
    parallel_for(nodes, workers_, [&](std::size_t j) {
      const double v = convolve(previous, h_ * static_cast<double>(j));
      values[j] = std::isfinite(v) ? v : kNegInf;
    });
    levels_.emplace_back(h_, std::move(values));
  }
}

const numerics::UniformRadialGrid& ConvolutionTable::level(int m) const {
  if (m < 1 || m > max_order()) {
    throw std::invalid_argument("convolution order " + std::to_string(m) + " outside 1.." +
                                std::to_string(max_order()));
  }
  return levels_[static_cast<std::size_t>(m - 1)];
}

double ConvolutionTable::log_density(int m, double r) const {
  const auto& grid = level(m);
  if (m == 1) return -fun_.f(std::abs(r));
  return grid(r);
}

LogBounds convolution_power_bounds(const RVFunction& fun, int dim, int m, double r, double delta) {
  if (m < 1) throw std::invalid_argument("convolution order must be at least 1");
  if (dim < 1) throw std::invalid_argument("dimension must be positive");
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");
  const double y = r / m;
  if (m == 1) return {-fun.f(r) - delta, -fun.f(r) + delta};
  const double f2 = y > 0.0 ? fun.derivative_unchecked(y, 2) : 0.0;
  if (!(y > fun.convexity_threshold()) || !(f2 > 0.0) || !std::isfinite(f2)) {
    throw DomainError("r/m = " + std::to_string(y) + " is below the convexity threshold",
                      fun.convexity_threshold());
  }
  const double n = dim;
  const double common = 0.5 * (n - 1.0) * (m - 1.0) * std::log(fun.alpha() - 1.0) +
                        0.5 * n * (m - 1.0) * std::log(2.0 * kPi / f2);
  return {common - 0.5 * n * std::log(static_cast<double>(m)) - m * (fun.f(y) + delta),
          common - m * (fun.f(y) - delta)};
}

}  // namespace levybridge
