#include "numerics.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

namespace levybridge::numerics {

double log_sum_exp(std::span<const double> values) {
  double peak = kNegInf;
  for (double v : values) peak = std::max(peak, v);
  if (peak == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
using Gauss = boost::math::quadrature::gauss<double, 10>;

struct Panel {
  double value;
  double error;
};

Panel kronrod_panel(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const auto& x = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();
  // 21-point Kronrod: odd indices are the embedded 10-point Gauss nodes.
  const double f0 = f(mid);
  double kronrod = f0 * wk[0];
  double gauss = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double sum = f(mid + half * x[i]) + f(mid - half * x[i]);
    kronrod += wk[i] * sum;
    if (i % 2 == 1) gauss += wg[i / 2] * sum;
  }
  return {half * kronrod, half * std::abs(kronrod - gauss)};
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 double* error) {
  if (!(b > a)) return 0.0;
  const Panel whole = kronrod_panel(f, a, b);
  const double target = rel_tol * std::abs(whole.value);
  double total = 0.0, total_error = 0.0;
  // Depth-first bisection; each panel gets a share of the tolerance proportional to its width.
  struct Pending {
    double a, b;
    Panel panel;
    int depth;
  };
  std::vector<Pending> stack{{a, b, whole, 0}};
  const double width = b - a;
  while (!stack.empty()) {
    const Pending p = stack.back();
    stack.pop_back();
    const double share = target * (p.b - p.a) / width;
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(p.panel.value);
    if (p.panel.error <= std::max(share, floor) || p.depth >= 24) {
      total += p.panel.value;
      total_error += p.panel.error;
      continue;
    }
    const double mid = 0.5 * (p.a + p.b);
    stack.push_back({mid, p.b, kronrod_panel(f, mid, p.b), p.depth + 1});
    stack.push_back({p.a, mid, kronrod_panel(f, p.a, mid), p.depth + 1});
  }
  if (error) *error = total_error;
  return total;
}

namespace {

// Crossing of log_f with `level` between x_in (above) and x_out (below).
double find_crossing(const std::function<double(double)>& log_f, double x_in, double x_out,
                     double level) {
  // The cut only has to sit roughly at the level, so a dozen halvings suffice.
  for (int it = 0; it < 12; ++it) {
    const double mid = 0.5 * (x_in + x_out);
    if (log_f(mid) >= level) {
      x_in = mid;
    } else {
      x_out = mid;
    }
  }
  return x_out;
}

}  // namespace

double log_integrate(const std::function<double(double)>& log_f, double a, double b,
                     const LogIntegralOptions& options) {
  if (!(b > a)) return kNegInf;
  const int probes = std::max(options.probes, 3);
  std::vector<double> xs(static_cast<std::size_t>(probes));
  std::vector<double> ys(xs.size());
  const double step = (b - a) / (probes - 1);
  std::size_t best = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = (i + 1 == xs.size()) ? b : a + step * static_cast<double>(i);
    ys[i] = log_f(xs[i]);
    if (ys[i] > ys[best]) best = i;
  }
  if (ys[best] == kNegInf) {
    // The support may sit between probes; fall back to a denser sweep once.
    if (probes < 512) {
      LogIntegralOptions denser = options;
      denser.probes = probes * 8;
      return log_integrate(log_f, a, b, denser);
    }
    return kNegInf;
  }

  const double lo = best == 0 ? xs[0] : xs[best - 1];
  const double hi = best + 1 == xs.size() ? xs.back() : xs[best + 1];
  auto negated = [&](double x) {
    const double v = log_f(x);
    return v == kNegInf ? std::numeric_limits<double>::max() : -v;
  };
  // Only the location of the shift matters, not its precision.
  std::uintmax_t max_iter = 40;
  auto [x_peak, neg_peak] = boost::math::tools::brent_find_minima(negated, lo, hi, 20, max_iter);
  double peak = -neg_peak;
  if (ys[best] > peak) {
    x_peak = xs[best];
    peak = ys[best];
  }

  const double level = peak - options.cutoff;
  double left = a;
  {
    // First probe left of the peak that falls below the cutoff level.
    std::ptrdiff_t i = static_cast<std::ptrdiff_t>(best);
    while (i >= 0 && (xs[static_cast<std::size_t>(i)] >= x_peak || ys[static_cast<std::size_t>(i)] >= level)) --i;
    if (i >= 0) {
      double inner = x_peak;
      for (std::size_t k = static_cast<std::size_t>(i) + 1; k < xs.size() && xs[k] < x_peak; ++k) {
        if (ys[k] >= level) {
          inner = xs[k];
          break;
        }
      }
      left = find_crossing(log_f, inner, xs[static_cast<std::size_t>(i)], level);
    }
  }
  double right = b;
  {
    std::size_t i = best;
    while (i < xs.size() && (xs[i] <= x_peak || ys[i] >= level)) ++i;
    if (i < xs.size()) {
      double inner = x_peak;
      for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(i) - 1; k >= 0 && xs[static_cast<std::size_t>(k)] > x_peak; --k) {
        if (ys[static_cast<std::size_t>(k)] >= level) {
          inner = xs[static_cast<std::size_t>(k)];
          break;
        }
      }
      right = find_crossing(log_f, inner, xs[i], level);
    }
  }

  auto shifted = [&](double x) {
    const double v = log_f(x);
    return v == kNegInf ? 0.0 : std::exp(v - peak);
  };
  std::vector<double> cuts{left, x_peak, right};
  for (double x : options.breakpoints) {
    if (x > left && x < right && x != x_peak) cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += integrate(shifted, cuts[i], cuts[i + 1], options.rel_tol);
  }
  if (!(total > 0.0)) return kNegInf;
  return peak + std::log(total);
}

UniformRadialGrid::UniformRadialGrid(double spacing, std::vector<double> values)
    : h_(spacing), inv_h_(1.0 / spacing), values_(std::move(values)) {
  if (!(spacing > 0.0) || values_.size() < 6) {
    throw std::invalid_argument("radial grid needs positive spacing and at least 6 nodes");
  }
}

double UniformRadialGrid::node(std::ptrdiff_t j) const noexcept {
  return values_[static_cast<std::size_t>(j < 0 ? -j : j)];
}

double UniformRadialGrid::operator()(double r) const noexcept {
  r = std::abs(r);
  const double u = r * inv_h_;
  const auto n = static_cast<std::ptrdiff_t>(values_.size());
  if (!(u <= static_cast<double>(n - 1))) return kNegInf;
  auto j = static_cast<std::ptrdiff_t>(u);
  // Six-point stencil j-2..j+3, shifted inward at the upper edge.
  if (j + 3 > n - 1) j = n - 4;
  const double s = u - static_cast<double>(j);
  std::array<double, 6> v;
  bool finite = true;
  for (int k = 0; k < 6; ++k) {
    v[static_cast<std::size_t>(k)] = node(j - 2 + k);
    finite = finite && v[static_cast<std::size_t>(k)] != kNegInf;
  }
  if (!finite) {
    // Near the underflow front fall back to the nearest finite node pair.
    const double v1 = v[2], v2 = v[3];
    if (v1 == kNegInf || v2 == kNegInf) return kNegInf;
    return v1 + s * (v2 - v1);
  }
  static constexpr std::array<double, 6> kDenominator{-120.0, 24.0, -12.0, 12.0, -24.0, 120.0};
  std::array<double, 6> prefix, suffix;
  prefix[0] = 1.0;
  suffix[5] = 1.0;
  for (int k = 1; k < 6; ++k) prefix[static_cast<std::size_t>(k)] = prefix[static_cast<std::size_t>(k - 1)] * (s - (k - 3));
  for (int k = 4; k >= 0; --k) suffix[static_cast<std::size_t>(k)] = suffix[static_cast<std::size_t>(k + 1)] * (s - (k - 1));
  double total = 0.0;
  for (std::size_t k = 0; k < 6; ++k) total += v[k] * prefix[k] * suffix[k] / kDenominator[k];
  return total;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)), d_(x_.size(), 0.0) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw std::invalid_argument("monotone cubic needs >= 2 matching nodes");
  std::vector<double> slope(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) slope[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
  d_[0] = slope[0];
  d_[n - 1] = slope[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (slope[i - 1] * slope[i] <= 0.0) {
      d_[i] = 0.0;
    } else {
      const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
      const double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
      d_[i] = (w1 + w2) / (w1 / slope[i - 1] + w2 / slope[i]);
    }
  }
}

double MonotoneCubic::operator()(double x) const {
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  if (i + 1 >= x_.size()) i = x_.size() - 2;
  const double h = x_[i + 1] - x_[i];
  const double s = (x - x_[i]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double sphere_area(int n) {
  switch (n) {
    case 1: return 2.0;
    case 2: return 2.0 * kPi;
    case 3: return 4.0 * kPi;
    default: return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
  }
}

}  // namespace levybridge::numerics
