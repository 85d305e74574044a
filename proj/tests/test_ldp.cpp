#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "bridge.hpp"
#include "errors.hpp"
#include "ldp.hpp"

using namespace levybridge;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BridgeConfig base_config(int dim = 1) {
  BridgeConfig cfg;
  cfg.fun = RVFunction(2.0);
  cfg.dim = dim;
  cfg.epsilon = 0.02;
  cfg.endpoint = dim == 1 ? std::vector<double>{1.0} : std::vector<double>{0.6, 0.8};
  return cfg;
}

// Root of g^2 + ln g = c + L by bisection.
double square_log_root(double c, double L) {
  double lo = 1e-3, hi = std::sqrt(L + std::abs(c)) + 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * mid + std::log(mid) - c - L < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Random admissible knots: sorted times in (0, T) and sorted fractions of x.
struct AdmissibleData {
  std::vector<double> times;
  std::vector<std::vector<double>> points;
};

AdmissibleData random_admissible(std::mt19937_64& rng, const BridgeConfig& cfg, int count) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> times(static_cast<std::size_t>(count)), fractions(static_cast<std::size_t>(count));
  for (auto& t : times) t = cfg.horizon * (0.01 + 0.98 * unit(rng));
  for (auto& f : fractions) f = unit(rng);
  std::sort(times.begin(), times.end());
  std::sort(fractions.begin(), fractions.end());
  AdmissibleData d;
  for (int i = 0; i < count; ++i) {
    if (i > 0 && times[static_cast<std::size_t>(i)] <= times[static_cast<std::size_t>(i - 1)]) continue;
    d.times.push_back(times[static_cast<std::size_t>(i)]);
    std::vector<double> y(cfg.endpoint.size());
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = fractions[static_cast<std::size_t>(i)] * cfg.endpoint[k];
    d.points.push_back(std::move(y));
  }
  return d;
}

std::vector<PathKnot> interpolation_knots(const BridgeConfig& cfg, const AdmissibleData& d) {
  std::vector<PathKnot> knots{{0.0, std::vector<double>(cfg.endpoint.size(), 0.0)}};
  for (std::size_t i = 0; i < d.times.size(); ++i) knots.push_back({d.times[i], d.points[i]});
  knots.push_back({cfg.horizon, cfg.endpoint});
  return knots;
}

}  // namespace

TEST_SUITE("ldp") {

TEST_CASE("speed function at eps = e^-100 solves the square-log equation") {
  BridgeConfig cfg = base_config();
  cfg.epsilon = std::exp(-100.0);
  const double c2 = -0.5 * std::log(3.14159265358979323846);
  const double oracle = cfg.epsilon * square_log_root(c2, 100.0);
  CHECK(speed_function(cfg, Variant::Simplified) == doctest::Approx(oracle).epsilon(1e-10));
  CHECK(speed_function(cfg) == doctest::Approx(oracle).epsilon(1e-2));
}

TEST_CASE("speed function decreases to zero") {
  BridgeConfig cfg = base_config();
  double previous = kInf;
  for (int k = 1; k <= 10; ++k) {
    cfg.epsilon = std::exp(-10.0 * k);
    const double s = speed_function(cfg);
    CHECK(s > 0.0);
    CHECK(s < previous);
    previous = s;
  }
  CHECK(previous < 1e-40);
}

TEST_CASE("a shorter time scale changes the speed only through g") {
  BridgeConfig cfg = base_config();
  cfg.epsilon = std::exp(-100.0);
  const double unscaled = speed_function(cfg);
  cfg.rho = 0.5;
  const double ratio = speed_function(cfg) / unscaled;
  const double c2 = -0.5 * std::log(3.14159265358979323846);
  CHECK(ratio == doctest::Approx(square_log_root(c2, 50.0) / square_log_root(c2, 100.0)).epsilon(1e-10));
  cfg.rho = 0.0;
  cfg.r_eps = std::exp(50.0);
  CHECK(speed_function(cfg) / unscaled == doctest::Approx(ratio).epsilon(1e-12));
}

TEST_CASE("linear path has zero rate") {
  for (int dim : {1, 2}) {
    BridgeConfig cfg = base_config(dim);
    cfg.horizon = 2.5;
    const std::vector<PathKnot> knots{{0.0, std::vector<double>(cfg.endpoint.size(), 0.0)},
                                      {cfg.horizon, cfg.endpoint}};
    const auto r = path_rate(cfg, knots);
    CHECK(r.admissible);
    CHECK(r.violations.empty());
    CHECK(r.value == 0.0);
  }
}

TEST_CASE("two-piece path rate") {
  const BridgeConfig cfg = base_config();
  const std::vector<PathKnot> knots{{0.0, {0.0}}, {0.25, {0.5}}, {1.0, {1.0}}};
  const auto r = path_rate(cfg, knots);
  CHECK(r.value == doctest::Approx(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0)).epsilon(1e-14));
}

TEST_CASE("paths leaving the segment or turning back have infinite rate") {
  const BridgeConfig cfg = base_config(2);
  const std::vector<PathKnot> off{{0.0, {0.0, 0.0}}, {0.5, {0.3, 0.5}}, {1.0, cfg.endpoint}};
  auto r = path_rate(cfg, off);
  CHECK(r.value == kInf);
  CHECK_FALSE(r.admissible);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0] == "off-segment");

  const std::vector<PathKnot> beyond{{0.0, {0.0, 0.0}}, {0.5, {0.9, 1.2}}, {1.0, cfg.endpoint}};
  r = path_rate(cfg, beyond);
  CHECK(r.value == kInf);
  REQUIRE(r.violations.size() == 2);
  CHECK(r.violations[1] == "non-monotone norm");

  const std::vector<PathKnot> back{{0.0, {0.0, 0.0}}, {0.3, {0.3, 0.4}}, {0.6, {0.15, 0.2}}, {1.0, cfg.endpoint}};
  r = path_rate(cfg, back);
  CHECK(r.value == kInf);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0] == "non-monotone norm");

  // Off by less than the tolerance counts as on the segment.
  const std::vector<PathKnot> near{{0.0, {0.0, 0.0}}, {0.5, {0.3, 0.4 + 1e-12}}, {1.0, cfg.endpoint}};
  CHECK(path_rate(cfg, near).admissible);
}

TEST_CASE("malformed knots are rejected") {
  const BridgeConfig cfg = base_config();
  const std::vector<PathKnot> unordered{{0.0, {0.0}}, {0.5, {0.2}}, {0.5, {0.4}}, {1.0, {1.0}}};
  CHECK_THROWS_AS(path_rate(cfg, unordered), std::invalid_argument);
  const std::vector<PathKnot> late_start{{0.1, {0.0}}, {1.0, {1.0}}};
  CHECK_THROWS_AS(path_rate(cfg, late_start), std::invalid_argument);
  const std::vector<PathKnot> wrong_end{{0.0, {0.0}}, {1.0, {0.9}}};
  CHECK_THROWS_AS(path_rate(cfg, wrong_end), std::invalid_argument);
  const std::array<double, 1> outside{1.0};
  const std::vector<std::vector<double>> p{{0.5}};
  CHECK_THROWS_AS(finite_dim_rate(cfg, outside, p), std::invalid_argument);
}

TEST_CASE("finite-dimensional rate at the midpoint is zero and off-segment is infinite") {
  const BridgeConfig cfg = base_config(2);
  const std::array<double, 1> half{0.5};
  const std::vector<std::vector<double>> mid{{0.3, 0.4}};
  CHECK(finite_dim_rate(cfg, half, mid).value == 0.0);
  const std::vector<std::vector<double>> off{{0.3, 0.5}};
  CHECK(finite_dim_rate(cfg, half, off).value == kInf);
}

TEST_CASE("finite-dimensional rate equals the rate of the linear interpolation") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    BridgeConfig cfg = base_config(1 + trial % 3);
    cfg.endpoint.assign(static_cast<std::size_t>(cfg.dim), 0.0);
    for (auto& c : cfg.endpoint) c = std::normal_distribution<double>(0.0, 1.0)(rng);
    cfg.horizon = 0.5 + 2.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto data = random_admissible(rng, cfg, 1 + trial % 5);
    const auto direct = finite_dim_rate(cfg, data.times, data.points);
    const auto via_path = path_rate(cfg, interpolation_knots(cfg, data));
    CHECK(direct.admissible);
    CHECK(std::abs(direct.value - via_path.value) <= 1e-9);
  }
}

TEST_CASE("rate is nonnegative on random admissible paths") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const BridgeConfig cfg = base_config(trial % 2 == 0 ? 1 : 2);
    const auto data = random_admissible(rng, cfg, 1 + trial % 7);
    const auto r = path_rate(cfg, interpolation_knots(cfg, data));
    REQUIRE(r.admissible);
    CHECK(r.value >= -1e-12);
  }
}

TEST_CASE("collinear midpoint refinement leaves the rate unchanged") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const BridgeConfig cfg = base_config(2);
    auto data = random_admissible(rng, cfg, 3);
    const double before = finite_dim_rate(cfg, data.times, data.points).value;
    // Insert the midpoint of the first piece, which starts at (0, 0).
    std::vector<double> mid(data.points[0].size());
    for (std::size_t k = 0; k < mid.size(); ++k) mid[k] = 0.5 * data.points[0][k];
    data.times.insert(data.times.begin(), 0.5 * data.times[0]);
    data.points.insert(data.points.begin(), mid);
    CHECK(finite_dim_rate(cfg, data.times, data.points).value == doctest::Approx(before).epsilon(1e-12));
  }
}

TEST_CASE("scaled log-density defect vanishes on the segment and diverges off it") {
  double mid_previous = kInf, quarter_previous = kInf, off_previous = -kInf;
  for (double log_inv_eps = 20.0; log_inv_eps <= 60.0; log_inv_eps += 10.0) {
    CAPTURE(log_inv_eps);
    BridgeConfig cfg = base_config();
    cfg.epsilon = std::exp(-log_inv_eps);
    const std::array<double, 1> mid{0.5}, three_quarters{0.75};
    const auto a = scaled_bridge_logdensity_defect(cfg, 0.5, mid);
    CHECK(a.rate.value == 0.0);
    CHECK(std::abs(a.value) < mid_previous);
    mid_previous = std::abs(a.value);

    const auto b = scaled_bridge_logdensity_defect(cfg, 0.5, three_quarters);
    CHECK(b.rate.value == doctest::Approx(0.75 * std::log(1.5) + 0.25 * std::log(0.5)).epsilon(1e-12));
    CHECK(std::abs(b.value) < quarter_previous);
    quarter_previous = std::abs(b.value);

    BridgeConfig plane = cfg;
    plane.dim = 2;
    plane.endpoint = {1.0, 0.0};
    const std::array<double, 2> off{0.5, 0.3};
    const auto c = scaled_bridge_logdensity_defect(plane, 0.5, off);
    CHECK_FALSE(c.rate.admissible);
    CHECK(c.value == c.scaled_log_density);
    CHECK(c.value > off_previous);
    off_previous = c.value;
  }
  CHECK(quarter_previous < 2e-3);
  BridgeConfig cfg = base_config();
  cfg.horizon = 2.0;
  const std::array<double, 1> y{0.5};
  CHECK_THROWS_AS(scaled_bridge_logdensity_defect(cfg, 0.5, y), std::invalid_argument);
}

TEST_CASE("jump scales and standardization of hand-built paths") {
  BridgeConfig cfg = base_config(2);
  cfg.fun = RVFunction(3.0);
  cfg.endpoint = {0.0, 2.0};
  const auto scales = jump_scales(cfg);
  const GSolver general({cfg.fun, 2, Variant::General, {}});
  const double g = general.solve(std::log(100.0));
  CHECK(scales.g == doctest::Approx(g).epsilon(1e-14));
  CHECK(scales.m_center == doctest::Approx(100.0 / g).epsilon(1e-14));
  CHECK(scales.k_scale == doctest::Approx(3.0 / 2.0 * 0.02 * g * std::log(50.0)).epsilon(1e-14));
  CHECK(scales.k_scale_short == doctest::Approx(3.0 / 2.0 * 0.02 * g).epsilon(1e-14));

  BridgePath p;
  p.jump_times = {0.2, 0.7};
  p.jumps = {{0.5, g + 1.0}, {-0.5, 100.0 - g - 1.0}};
  const std::vector<BridgePath> paths{p};
  const auto js = jump_statistics(cfg, paths);
  const double curvature = std::sqrt(6.0 * g);
  REQUIRE(js.standardized_increments.size() == 1);
  CHECK(js.standardized_increments[0][1] == doctest::Approx(curvature).epsilon(1e-12));
  CHECK(js.standardized_increments[0][0] == doctest::Approx(0.5 * curvature * 0.5).epsilon(1e-12));
  CHECK(js.standardized_counts[0] == doctest::Approx(std::sqrt(scales.k_scale) * (2.0 - 100.0 / g)).epsilon(1e-12));
  CHECK(js.mean_jump_norm == doctest::Approx(std::hypot(0.5, g + 1.0)).epsilon(1e-14));
  CHECK(js.balance == doctest::Approx(2.0 * std::hypot(0.5, g + 1.0) / 100.0).epsilon(1e-14));
  CHECK(js.speed == doctest::Approx(speed_function(cfg)).epsilon(1e-14));

  CHECK_THROWS_AS(jump_statistics(cfg, std::vector<BridgePath>{}), std::invalid_argument);
}

TEST_CASE("pairwise summation is exact on representable data") {
  std::vector<double> v(1001);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  CHECK(pairwise_sum(v) == 500500.0);
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("tail exponent matches the classical constant") {
  const RVFunction square(2.0);
  auto r = dtilde_consistency(square, 1, 1e4, 1.0);
  CHECK(r.d_alpha == 2.0);
  CHECK(r.q == doctest::Approx(100.0).epsilon(1e-12));
  double previous = kInf;
  for (double L : {1e2, 1e3, 1e4, 1e5}) {
    for (double alpha : {2.0, 3.0, 1.5}) {
      CAPTURE(L);
      CAPTURE(alpha);
      r = dtilde_consistency(RVFunction(alpha), 1, L, 1.0);
      if (L == 1e5) {
        CHECK(std::abs(r.ratio_with_correction - 1.0) < 0.15);
        CHECK(std::abs(r.ratio_leading - 1.0) < 0.15);
      }
    }
    r = dtilde_consistency(square, 1, L, 1.0);
    CHECK(std::abs(r.ratio_leading - 1.0) < previous);
    previous = std::abs(r.ratio_leading - 1.0);
  }
  BridgeConfig cfg = base_config();
  const auto from_cfg = dtilde_consistency(cfg);
  CHECK(from_cfg.ratio_leading == doctest::Approx(dtilde_consistency(square, 1, -std::log(0.02), 1.0).ratio_leading));
  CHECK(r.log_dtilde == doctest::Approx(std::log(2.0) + std::log(1e5 / std::sqrt(1e5)) + 1e5).epsilon(1e-14));
}

}  // TEST_SUITE

TEST_SUITE("ldp_mc") {

TEST_CASE("gaussian jumps in the plane have isotropic spread") {
  BridgeConfig cfg = base_config(2);
  cfg.endpoint = {0.6, 0.8};
  BridgeModel model(cfg);
  const auto paths = model.sample_many(0, 5000);
  const auto js = jump_statistics(cfg, paths);
  CAPTURE(js.raw_variance_along);
  CAPTURE(js.raw_variance_across);
  CHECK(std::abs(js.raw_variance_along / js.raw_variance_across - 1.0) < 0.1);
}

// The centring m_center and the jump size g are asymptotic; their offsets from the
// exact conditional law shrink with eps.
TEST_CASE("standardized count and jump biases of the exact law shrink with eps") {
  std::vector<double> count_bias, jump_bias;
  for (double eps : {0.05, 0.02, 0.01}) {
    BridgeConfig cfg = base_config();
    cfg.epsilon = eps;
    const BridgeModel model(cfg);
    const auto scales = jump_scales(cfg);
    double mean = 0.0, second = 0.0, inverse = 0.0;
    for (int m = 1; m <= model.m_cap(); ++m) {
      const double p = std::exp(model.count_log_pmf(m));
      mean += p * m;
      second += p * m * m;
      inverse += p / m;
    }
    count_bias.push_back(std::sqrt(scales.k_scale) * (mean - scales.m_center));
    // Jumps are exchangeable, so E W_1 = (|x| / eps) E[1 / N].
    jump_bias.push_back(std::sqrt(2.0) * (cfg.scaled_radius() * inverse - scales.g));
    CHECK(scales.k_scale * (second - mean * mean) == doctest::Approx(1.0).epsilon(0.2));
  }
  CAPTURE(count_bias[0]);
  CAPTURE(count_bias[2]);
  CHECK(count_bias[0] > count_bias[1]);
  CHECK(count_bias[1] > count_bias[2]);
  CHECK(count_bias[2] > 0.0);
  CHECK(jump_bias[0] > jump_bias[1]);
  CHECK(jump_bias[1] > jump_bias[2]);
  CHECK(jump_bias[2] > 0.0);
}

}  // TEST_SUITE

TEST_SUITE("ldp_speed_ratio") {

TEST_CASE("speed ratio between rho = 0.5 and rho = 0 at eps = e^-100") {
  BridgeConfig cfg = base_config();
  cfg.epsilon = std::exp(-100.0);
  const double unscaled = speed_function(cfg);
  cfg.rho = 0.5;
  const double ratio = speed_function(cfg) / unscaled;
  CAPTURE(ratio);
  CHECK(ratio > 0.7);
  CHECK(ratio < 1.0);
}

}  // TEST_SUITE
