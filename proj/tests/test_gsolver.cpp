#include <doctest.h>

#include <cmath>
#include <random>

#include "errors.hpp"
#include "gsolver.hpp"

using namespace levybridge;

namespace {

GSolver make(double alpha, int dim, Variant v, CorrectionTerm k = {}) {
  return GSolver(EquationSpec{RVFunction(alpha), dim, v, k});
}

// Plain bisection on g^2 + ln g - C2 - L.
double bisect_square(double c2, double L, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * mid + std::log(mid) - c2 - L < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("gsolver") {

TEST_CASE("simplified constants") {
  auto c = simplified_constants(2.0, 1);
  CHECK(c.c1 == 1.0);
  CHECK(c.c3 == 1.0);
  CHECK(c.c2 == doctest::Approx(-0.5723649429247001).epsilon(1e-12));
  c = simplified_constants(2.0, 2);
  CHECK(c.c1 == 1.0);
  CHECK(c.c3 == 1.0);
  c = simplified_constants(3.0, 1);
  CHECK(c.c1 == 0.25);
  CHECK(c.c3 == 0.5);
  CHECK(c.c2 == doctest::Approx((std::log(2.0) + std::log(3.0) - std::log(2 * M_PI)) / 4).epsilon(1e-14));
  CHECK_THROWS_AS(simplified_constants(1.0, 1), std::invalid_argument);
}

TEST_CASE("simplified root at log Lambda 100") {
  const auto solver = make(2.0, 1, Variant::Simplified);
  const double g = solver.solve(100.0);
  CHECK(g > 9.0);
  CHECK(g < 10.5);
  const double oracle = bisect_square(simplified_constants(2.0, 1).c2, 100.0, 9.0, 10.5);
  CHECK(g == doctest::Approx(oracle).epsilon(1e-13));
  CHECK(std::abs(solver.residual(100.0, g)) <= 1e-10 * 100.0);
}

TEST_CASE("general and simplified coincide for pure powers") {
  for (double alpha : {1.5, 2.0, 3.0}) {
    for (int n : {1, 2, 3}) {
      const auto s = make(alpha, n, Variant::Simplified);
      const auto g = make(alpha, n, Variant::General);
      for (double L : {5.0, 50.0, 1e3, 1e5}) {
        CHECK(g.solve(L) == doctest::Approx(s.solve(L)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("residual contract on random points") {
  std::mt19937_64 gen(11);
  for (double alpha : {1.5, 2.0, 3.0}) {
    for (Variant v : {Variant::General, Variant::GZero}) {
      const auto solver = make(alpha, 1, v);
      std::uniform_real_distribution<double> dist(solver.log_lambda_floor(), 1e6);
      for (int i = 0; i < 1000; ++i) {
        const double L = dist(gen);
        const double g = solver.solve(L);
        CHECK(std::abs(solver.residual(L, g)) <= 1e-10 * std::abs(L));
      }
    }
  }
}

TEST_CASE("floor violation carries the floor") {
  const auto solver = make(3.0, 3, Variant::General);
  try {
    solver.solve(solver.log_lambda_floor() - 1.0);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.bound() == solver.log_lambda_floor());
  }
}

TEST_CASE("cached and uncached solves agree") {
  const auto solver = make(2.0, 2, Variant::GZero);
  for (double L = 3.0; L < 1e6; L *= 1.7) {
    CHECK(solver.solve(L) == doctest::Approx(solver.solve_uncached(L)).epsilon(1e-12));
  }
}

TEST_CASE("monotone and slowly varying") {
  const auto solver = make(2.0, 1, Variant::General);
  double previous = 0.0;
  for (double L = solver.log_lambda_floor(); L < 1e6; L += std::max(1.0, 0.3 * std::abs(L))) {
    const double g = solver.solve(L);
    CHECK(g >= previous);
    previous = g;
  }
  const double L = 1e5;
  const double ratio = solver.solve(L + std::log(2.0)) / solver.solve(L);
  CHECK(ratio >= 0.99);
  CHECK(ratio <= 1.01);
}

TEST_CASE("asymptotic limit of g") {
  CHECK(asymptotic_g_limit(2.0) == 1.0);
  CHECK(asymptotic_g_limit(3.0) == doctest::Approx(0.7937005259840998));
  const auto solver = make(2.0, 1, Variant::General);
  double previous_gap = INFINITY;
  for (double L : {1e2, 1e3, 1e4}) {
    const double gap = std::abs(solver.solve(L) / std::sqrt(L) - 1.0);
    CHECK(gap < previous_gap);
    previous_gap = gap;
  }
}

TEST_CASE("limit ratios") {
  for (double alpha : {2.0, 3.0}) {
    const auto solver = make(alpha, 1, Variant::General);
    const auto r = solver.limit_diagnostics(1e6);
    const auto t = LimitRatios::targets(alpha);
    CHECK(r.log_derivative == doctest::Approx(t.log_derivative).epsilon(0.05));
    CHECK(r.f_ratio == doctest::Approx(t.f_ratio).epsilon(0.05));
    CHECK(r.fprime_ratio == doctest::Approx(t.fprime_ratio).epsilon(0.05));
    CHECK(r.legendre_ratio == doctest::Approx(t.legendre_ratio).epsilon(0.05));
  }
  CHECK(LimitRatios::targets(3.0).f_ratio == 0.5);
}

TEST_CASE("implicit derivative matches a difference quotient") {
  const auto solver = make(2.5, 2, Variant::GZero);
  const double L = 40.0, h = 1e-4;
  const double fd = (solver.solve(L + h) - solver.solve(L - h)) / (2 * h);
  CHECK(solver.dg_dlog_lambda(L) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("cancellation relation") {
  const auto solver = make(2.0, 1, Variant::General);
  CHECK(solver.cancellation_defect(1e4, 1.0) == 0.0);
  CHECK(std::abs(solver.cancellation_defect(1e4, 2.0)) <= 0.1 * std::log(2.0));
  CHECK_THROWS_AS(solver.cancellation_defect(1e2, 1e3, 1.0), std::invalid_argument);
  for (double L : {1e2, 1e3, 1e4}) {
    const double up = solver.cancellation_defect(L, 2.0);
    const double down = solver.cancellation_defect(L, 0.5);
    CHECK(up * down < 0.0);
  }
}

TEST_CASE("sensitivity to the correction term") {
  const auto base = make(2.0, 1, Variant::General);
  CorrectionTerm k = base.correction();
  CHECK(sensitivity_gap(base, make(2.0, 1, Variant::CustomK, k), 1e5) == 0.0);
  k.constant += 1.0;
  CHECK(sensitivity_gap(base, make(2.0, 1, Variant::CustomK, k), 1e5) == doctest::Approx(1.0).epsilon(0.1));
  k.constant = base.correction().constant + std::log(2.0);
  CHECK(sensitivity_gap(base, make(2.0, 1, Variant::CustomK, k), 1e5) ==
        doctest::Approx(std::log(2.0)).epsilon(0.1));
  CHECK_THROWS_AS(sensitivity_gap(base, make(2.0, 2, Variant::General), 10.0), std::invalid_argument);
}

TEST_CASE("auxiliary and main equations differ by n(alpha/2 - 1)") {
  const auto general = make(3.0, 1, Variant::General);
  const auto zero = make(3.0, 1, Variant::GZero);
  CHECK(sensitivity_gap(general, zero, 1e5) == doctest::Approx(0.5).epsilon(0.15));
}

}
