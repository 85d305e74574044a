#include <doctest.h>

#include <cmath>
#include <random>

#include "errors.hpp"
#include "rvfun.hpp"

using levybridge::RVFunction;

TEST_SUITE("rvfun") {

TEST_CASE("pure power values") {
  CHECK(RVFunction(2.0).f(3.0) == 9.0);
  CHECK(RVFunction(2.0).f(0.0) == 0.0);
  CHECK(RVFunction(1.5).f(4.0) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(RVFunction(2.0, 3.0).f(2.0) == 12.0);
}

TEST_CASE("derivatives of pure powers") {
  RVFunction sq(2.0);
  CHECK(sq.derivative(5.0, 2) == 2.0);
  CHECK(RVFunction(3.0).derivative(2.0, 1) == 12.0);
  CHECK_THROWS_AS(sq.derivative(1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(sq.derivative(1.0, 4), std::invalid_argument);

  for (double alpha : {1.3, 2.0, 2.7}) {
    RVFunction fun(alpha, 1.7);
    for (double x = 0.1; x <= 1e8; x *= 3.7) {
      const double p1 = 1.7 * alpha * std::pow(x, alpha - 1);
      const double p2 = 1.7 * alpha * (alpha - 1) * std::pow(x, alpha - 2);
      const double p3 = 1.7 * alpha * (alpha - 1) * (alpha - 2) * std::pow(x, alpha - 3);
      CHECK(fun.derivative(x, 1) == doctest::Approx(p1).epsilon(1e-14));
      CHECK(fun.derivative(x, 2) == doctest::Approx(p2).epsilon(1e-14));
      CHECK(fun.derivative(x, 3) == doctest::Approx(p3).epsilon(1e-14));
    }
  }
}

TEST_CASE("perturbed derivatives match finite differences") {
  RVFunction fun(2.0, 1.0, 0.1);
  auto central = [](auto&& h, double x, double step) { return (h(x + step) - h(x - step)) / (2 * step); };
  const double x = 10.0;
  const double d1 = central([&](double s) { return fun.f(s); }, x, 1e-5);
  CHECK(fun.derivative(x, 1) == doctest::Approx(d1).epsilon(1e-8));
  for (double y : {0.5, 3.0, 40.0, 1e3}) {
    for (int order = 2; order <= 4; ++order) {
      const double step = 1e-4 * y;
      const double fd = central([&](double s) { return fun.derivative_unchecked(s, order - 1); }, y, step);
      CHECK(fun.derivative_unchecked(y, order) == doctest::Approx(fd).epsilon(1e-6).scale(1e-9));
    }
  }
}

TEST_CASE("jump measure mass against closed forms") {
  const double pi = 3.14159265358979323846;
  CHECK(levybridge::jump_measure_mass(RVFunction(2.0), 1) == doctest::Approx(std::sqrt(pi)).epsilon(1e-10));
  CHECK(levybridge::jump_measure_mass(RVFunction(2.0), 2) == doctest::Approx(pi).epsilon(1e-10));
  CHECK(levybridge::jump_measure_mass(RVFunction(2.0), 3) == doctest::Approx(std::pow(pi, 1.5)).epsilon(1e-10));
  for (double alpha : {1.5, 3.0}) {
    // 2 Gamma(1 + 1/alpha) in one dimension.
    CHECK(levybridge::jump_measure_mass(RVFunction(alpha), 1) ==
          doctest::Approx(2.0 * std::tgamma(1.0 + 1.0 / alpha)).epsilon(1e-10));
  }
}

TEST_CASE("jump measure mass near alpha = 1 against a trapezoid oracle") {
  RVFunction fun(1.0001);
  const double h = 1e-3;
  const double upper = 900.0;
  double sum = 0.5 * (std::exp(-fun.f(0.0)) + std::exp(-fun.f(upper)));
  for (int i = 1; i * h < upper; ++i) sum += std::exp(-fun.f(i * h));
  const double oracle = 2.0 * h * sum;
  CHECK(levybridge::jump_measure_mass(fun, 1) == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("floor extension keeps f constant below x0") {
  RVFunction fun(2.0, 1.0, std::nullopt, 0.5);
  CHECK(fun.f(0.1) == 0.25);
  CHECK(fun.derivative(0.2, 1) == 0.0);
  // a = 2 (0.5 e^{-0.25}) + 2 int_{0.5}^inf e^{-x^2} dx
  const double pi = 3.14159265358979323846;
  const double expected = std::exp(-0.25) + std::sqrt(pi) * std::erfc(0.5);
  CHECK(levybridge::jump_measure_mass(fun, 1) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("regular variation at large x") {
  for (auto beta : {std::optional<double>{}, std::optional<double>{0.5}}) {
    RVFunction fun(2.5, 1.0, beta);
    const double x = 1e6;
    CHECK(x * fun.derivative(x, 1) / fun.f(x) == doctest::Approx(2.5).epsilon(1e-2));
    for (double lambda : {2.0, 10.0}) {
      CHECK(fun.f(lambda * x) / fun.f(x) == doctest::Approx(std::pow(lambda, 2.5)).epsilon(1e-2));
    }
  }
}

TEST_CASE("convexity above the threshold") {
  CHECK(RVFunction(2.0).convexity_threshold() == 0.0);
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> beta_dist(-0.9, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    RVFunction fun(1.2 + 0.1 * trial, 1.0, beta_dist(gen));
    for (double x = std::max(fun.convexity_threshold(), 1e-6); x < 1e8; x *= 1.1) {
      CHECK(fun.derivative(x, 1) > 0.0);
      CHECK(fun.derivative(x, 2) > 0.0);
    }
  }
}

TEST_CASE("json round trip and validation") {
  RVFunction fun(2.5, 0.7, 0.3, 0.1);
  const auto back = RVFunction::from_json(fun.to_json());
  CHECK(back.alpha() == 2.5);
  CHECK(back.scale() == 0.7);
  CHECK(back.beta() == 0.3);
  CHECK(back.domain_floor() == 0.1);
  CHECK_THROWS_AS(RVFunction(1.0), std::invalid_argument);
  CHECK_THROWS_AS(RVFunction::from_json({{"alpha", 2.0}, {"colour", 1}}), std::invalid_argument);
}

TEST_CASE("inverse of f") {
  CHECK(RVFunction(2.0).inverse(9.0) == doctest::Approx(3.0));
  RVFunction fun(2.0, 1.0, 0.2);
  CHECK(fun.f(fun.inverse(50.0)) == doctest::Approx(50.0).epsilon(1e-12));
}

}
