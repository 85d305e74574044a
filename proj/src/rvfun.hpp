#pragma once

// Jump exponent f(x) = c x^alpha (1 + beta / ln(e + x)) for x >= x0, held
// constant at f(x0) below the floor. The jump measure has density exp(-f(|z|)).

#include <optional>
#include <string>

#include <json.hpp>

namespace levybridge {

class RVFunction {
public:
  RVFunction(double alpha, double scale = 1.0, std::optional<double> beta = std::nullopt,
             double domain_floor = 0.0);

  double alpha() const noexcept { return alpha_; }
  double scale() const noexcept { return scale_; }
  std::optional<double> beta() const noexcept { return beta_; }
  double domain_floor() const noexcept { return floor_; }
  bool pure_power() const noexcept { return !beta_ || *beta_ == 0.0; }

  /// Smallest grid point beyond which f' > 0 and f'' > 0 (0 for a pure power).
  double convexity_threshold() const noexcept { return threshold_; }

  double f(double x) const noexcept;
  /// Derivative of order 1..3; throws std::invalid_argument otherwise.
  double derivative(double x, int order) const;
  /// Orders 0..4 without argument checking. Order 4 feeds implicit derivatives of g.
  double derivative_unchecked(double x, int order) const noexcept;

  /// Largest y with f(y) <= level on the increasing branch.
  double inverse(double level) const;

  nlohmann::json to_json() const;
  static RVFunction from_json(const nlohmann::json& j);

private:
  double alpha_;
  double scale_;
  std::optional<double> beta_;
  double floor_;
  double threshold_ = 0.0;
};

/// f together with the dimension and the total mass a = nu(R^n).
/// The normalized exponent f + ln a gives a probability measure.
class JumpModel {
public:
  JumpModel(RVFunction fun, int dim);

  const RVFunction& fun() const noexcept { return fun_; }
  int dim() const noexcept { return dim_; }
  double mass() const noexcept { return mass_; }
  double log_mass() const noexcept { return log_mass_; }

  double f(double x) const noexcept { return fun_.f(x); }
  double f_normalized(double x) const noexcept { return fun_.f(x) + log_mass_; }

private:
  RVFunction fun_;
  int dim_;
  double mass_;
  double log_mass_;
};

/// a = integral of exp(-f(|z|)) over R^n, n in {1, 2, 3}.
double jump_measure_mass(const RVFunction& fun, int dim);

}  // namespace levybridge
