#include "rvfun.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "errors.hpp"
#include "numerics.hpp"

namespace levybridge {

namespace {

constexpr double kE = 2.71828182845904523536;

// Derivatives 0..4 of 1/ln(e + x).
std::array<double, 5> inverse_log_derivatives(double x) {
  const double w = 1.0 / (kE + x);
  const double l = std::log(kE + x);
  const double l1 = w, l2 = -w * w, l3 = 2.0 * w * w * w, l4 = -6.0 * w * w * w * w;
  const double il = 1.0 / l;
  const double u1 = -il * il, u2 = 2.0 * il * il * il, u3 = -6.0 * il * il * il * il,
               u4 = 24.0 * il * il * il * il * il;
  return {il, u1 * l1, u2 * l1 * l1 + u1 * l2, u3 * l1 * l1 * l1 + 3.0 * u2 * l1 * l2 + u1 * l3,
          u4 * l1 * l1 * l1 * l1 + 6.0 * u3 * l1 * l1 * l2 + u2 * (3.0 * l2 * l2 + 4.0 * l1 * l3) +
              u1 * l4};
}

}  // namespace

RVFunction::RVFunction(double alpha, double scale, std::optional<double> beta, double domain_floor)
    : alpha_(alpha), scale_(scale), beta_(beta), floor_(domain_floor) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must exceed 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("scale must be positive");
  if (!(domain_floor >= 0.0) || !std::isfinite(domain_floor)) {
    throw std::invalid_argument("domain_floor must be nonnegative");
  }
  if (beta && !std::isfinite(*beta)) throw std::invalid_argument("beta must be finite");
  if (beta && *beta <= -1.0) throw std::invalid_argument("beta must exceed -1 so that f stays positive");
  if (f(domain_floor) < 0.0) throw std::invalid_argument("f must be nonnegative at domain_floor");

  threshold_ = floor_;
  if (!pure_power()) {
    // Scan a log grid and keep the last point where convexity or growth fails.
    for (double x = std::max(floor_, 1e-8); x <= 1e8; x *= 1.02) {
      if (derivative_unchecked(x, 1) <= 0.0 || derivative_unchecked(x, 2) <= 0.0) {
        threshold_ = x * 1.02;
      }
    }
  }
}

double RVFunction::f(double x) const noexcept {
  x = std::max(std::abs(x), floor_);
  const double power = scale_ * std::pow(x, alpha_);
  if (pure_power()) return power;
  return power * (1.0 + *beta_ / std::log(kE + x));
}

double RVFunction::derivative(double x, int order) const {
  if (order < 1 || order > 3) throw std::invalid_argument("derivative order must be 1, 2 or 3");
  return derivative_unchecked(x, order);
}

double RVFunction::derivative_unchecked(double x, int order) const noexcept {
  if (order == 0) return f(x);
  if (x < floor_ || (x == floor_ && floor_ > 0.0)) return 0.0;
  // p^(k) = c alpha (alpha-1) ... (alpha-k+1) x^(alpha-k)
  std::array<double, 5> p{};
  double falling = scale_;
  for (int k = 0; k <= order; ++k) {
    p[static_cast<std::size_t>(k)] = falling * std::pow(x, alpha_ - k);
    falling *= alpha_ - k;
  }
  if (pure_power()) return p[static_cast<std::size_t>(order)];
  const auto u = inverse_log_derivatives(x);
  std::array<double, 5> h{};
  h[0] = 1.0 + *beta_ * u[0];
  for (int k = 1; k <= 4; ++k) h[static_cast<std::size_t>(k)] = *beta_ * u[static_cast<std::size_t>(k)];
  static constexpr std::array<std::array<double, 5>, 5> binom{{{1, 0, 0, 0, 0},
                                                               {1, 1, 0, 0, 0},
                                                               {1, 2, 1, 0, 0},
                                                               {1, 3, 3, 1, 0},
                                                               {1, 4, 6, 4, 1}}};
  double sum = 0.0;
  for (int j = 0; j <= order; ++j) {
    sum += binom[static_cast<std::size_t>(order)][static_cast<std::size_t>(j)] *
           p[static_cast<std::size_t>(order - j)] * h[static_cast<std::size_t>(j)];
  }
  return sum;
}

double RVFunction::inverse(double level) const {
  if (level <= f(floor_)) return floor_;
  if (pure_power()) return std::pow(level / scale_, 1.0 / alpha_);
  double lo = std::max(floor_, threshold_), hi = std::max(1.0, 2.0 * lo);
  while (f(hi) < level) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) <= level ? lo : hi) = mid;
  }
  return lo;
}

nlohmann::json RVFunction::to_json() const {
  nlohmann::json j{{"alpha", alpha_}, {"scale", scale_}, {"domain_floor", floor_}};
  j["beta"] = beta_ ? nlohmann::json(*beta_) : nlohmann::json(nullptr);
  return j;
}

RVFunction RVFunction::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("model must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "alpha" && key != "scale" && key != "beta" && key != "domain_floor") {
      throw std::invalid_argument("unknown model key: " + key);
    }
  }
  if (!j.contains("alpha")) throw std::invalid_argument("model requires alpha");
  std::optional<double> beta;
  if (j.contains("beta") && !j.at("beta").is_null()) beta = j.at("beta").get<double>();
  return RVFunction(j.at("alpha").get<double>(), j.value("scale", 1.0), beta,
                    j.value("domain_floor", 0.0));
}

double jump_measure_mass(const RVFunction& fun, int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
  const double x0 = fun.domain_floor();
  const double f0 = fun.f(x0);
  double radial = std::exp(-f0) * std::pow(x0, dim) / dim;
  // Split the tail at doubling radii until the integrand is negligible.
  const double cut = f0 + 800.0;
  double a = x0;
  double b = x0 + 1.0;
  for (int piece = 0; piece < 200; ++piece) {
    double err = 0.0;
    const double part = numerics::integrate(
        [&](double r) { return std::pow(r, dim - 1) * std::exp(-fun.f(r)); }, a, b, 1e-12, &err);
    if (!std::isfinite(part) || err > 1e-10 * std::abs(part) + 1e-12) {
      throw NumericFailure("jump measure mass quadrature did not converge on [" + std::to_string(a) +
                           ", " + std::to_string(b) + "], error estimate " + std::to_string(err));
    }
    radial += part;
    if (fun.f(b) > cut) return numerics::sphere_area(dim) * radial;
    a = b;
    b = x0 + 2.0 * (b - x0);
  }
  throw NumericFailure("jump measure mass: tail did not decay");
}

JumpModel::JumpModel(RVFunction fun, int dim) : fun_(std::move(fun)), dim_(dim) {
  mass_ = jump_measure_mass(fun_, dim_);
  log_mass_ = std::log(mass_);
}

}  // namespace levybridge
