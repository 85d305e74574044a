#include "validation.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>

#include "errors.hpp"
#include "ldp.hpp"
#include "marginal.hpp"

namespace levybridge {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Check = CheckReport (*)(const RunConfig&);

GSolver general_solver(const RunConfig& cfg) { return GSolver({cfg.model, cfg.dim, Variant::General, {}}); }

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return true;
}

// One table per (model, dimension, spacing) and one sample set per configuration,
// so that `report` builds each of them once.
std::shared_ptr<ConvolutionTable> shared_table(const RunConfig& cfg, double r_max) {
  static std::mutex mutex;
  static std::map<std::string, std::shared_ptr<ConvolutionTable>> cache;
  const std::string key = cfg.model.to_json().dump() + "|" + std::to_string(cfg.dim) + "|" +
                          std::to_string(cfg.spacing) + "|" + std::to_string(r_max);
  std::lock_guard lock(mutex);
  auto& slot = cache[key];
  if (!slot) {
    slot = std::make_shared<ConvolutionTable>(cfg.model, cfg.dim, 1,
                                              ConvolutionOptions{r_max, cfg.spacing, cfg.workers});
  }
  return slot;
}

struct SampleSet {
  std::unique_ptr<BridgeModel> model;
  std::vector<BridgePath> paths;
  double seconds = 0.0;
};

const SampleSet& shared_samples(const RunConfig& cfg) {
  static std::mutex mutex;
  static std::map<std::string, std::unique_ptr<SampleSet>> cache;
  nlohmann::json key = cfg.to_json();
  key.erase("output");
  key["numerics"].erase("workers");
  std::lock_guard lock(mutex);
  auto& slot = cache[key.dump()];
  if (!slot) {
    slot = std::make_unique<SampleSet>();
    const auto start = std::chrono::steady_clock::now();
    slot->model = std::make_unique<BridgeModel>(cfg.bridge(), cfg.numerics());
    slot->paths = slot->model->sample_many(0, cfg.samples, cfg.workers);
    slot->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return *slot;
}

CheckReport g_limits(const RunConfig& cfg) {
  CheckReport r;
  r.check = "g-limits";
  r.anchor = "limits of g and its derivatives; growth of g against (ln Lambda)^(1/alpha)";
  const GSolver solver = general_solver(cfg);
  const double alpha = cfg.model.alpha();
  const auto targets = LimitRatios::targets(alpha);
  const double g_limit = asymptotic_g_limit(alpha);
  r.sweep.columns = {"log_lambda", "g", "log_derivative", "f_ratio", "fprime_ratio", "legendre_ratio", "g_over_limit"};
  double worst_ratio = 0.0, g_error = 0.0;
  for (double L : {1e2, 1e3, 1e4, 1e5, 1e6}) {
    const double g = solver.solve(L);
    const auto d = solver.limit_diagnostics(L);
    const double scaled = g / std::pow(L, 1.0 / alpha) / g_limit;
    r.sweep.rows.push_back({L, g, d.log_derivative, d.f_ratio, d.fprime_ratio, d.legendre_ratio, scaled});
    if (L == 1e6) {
      worst_ratio = std::max({std::abs(d.log_derivative / targets.log_derivative - 1.0),
                              std::abs(d.f_ratio / targets.f_ratio - 1.0),
                              std::abs(d.fprime_ratio / targets.fprime_ratio - 1.0),
                              std::abs(d.legendre_ratio / targets.legendre_ratio - 1.0)});
      g_error = std::abs(scaled - 1.0);
    }
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uniform(solver.log_lambda_floor(), 1e6);
  double worst_residual = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double L = uniform(rng);
    worst_residual = std::max(worst_residual, std::abs(solver.residual(L, solver.solve(L))) / std::abs(L));
  }
  r.metrics = {{"max_relative_residual", worst_residual},
               {"worst_ratio_error_at_1e6", worst_ratio},
               {"g_limit_error_at_1e6", g_error}};
  r.pass = worst_residual <= 1e-10 && worst_ratio <= 0.05 && g_error <= 0.10;
  return r;
}

CheckReport cancellation(const RunConfig& cfg) {
  CheckReport r;
  r.check = "cancellation";
  r.anchor = "asymptotic cancellation relation g(Lambda)[f'(g(y Lambda)) - f'(g(Lambda))] -> ln y";
  const GSolver solver = general_solver(cfg);
  r.sweep.columns = {"log_lambda", "y", "defect", "bound"};
  bool pass = true;
  nlohmann::json finals = nlohmann::json::object();
  for (double y : {0.5, 2.0, 5.0}) {
    std::vector<double> sizes;
    for (double L : {1e2, 1e3, 1e4}) {
      const double d = solver.cancellation_defect(L, y);
      r.sweep.rows.push_back({L, y, d, 0.1 * std::abs(std::log(y))});
      sizes.push_back(std::abs(d));
    }
    pass = pass && strictly_decreasing(sizes) && sizes.back() <= 0.1 * std::abs(std::log(y));
    finals[(std::ostringstream() << y).str()] = sizes.back();
  }
  r.metrics = {{"defect_at_1e4", finals}};
  r.pass = pass;
  return r;
}

CheckReport conv_bounds(const RunConfig& cfg) {
  CheckReport r;
  r.check = "conv-bounds";
  r.anchor = "m-fold convolution density sandwich";
  const double delta = 0.2, r_max = cfg.dim == 1 ? 60.0 : 20.0;
  const int max_order = 8;
  ConvolutionTable table(cfg.model, cfg.dim, max_order, {r_max, cfg.spacing, cfg.workers});
  r.sweep.columns = {"m", "r", "r_over_m", "lower", "log_density", "upper", "inside"};
  nlohmann::json onsets = nlohmann::json::object();
  bool pass = true;
  const double h = table.spacing();
  for (int m = 2; m <= max_order; ++m) {
    std::vector<double> radii;
    std::vector<bool> inside;
    for (double rad = h; rad <= r_max + 1e-9; rad += h) {
      LogBounds b;
      try {
        b = convolution_power_bounds(cfg.model, cfg.dim, m, rad, delta);
      } catch (const DomainError&) {
        continue;
      }
      const double v = table.log_density(m, rad);
      const bool ok = b.lower <= v && v <= b.upper;
      r.sweep.rows.push_back({double(m), rad, rad / m, b.lower, v, b.upper, ok ? 1.0 : 0.0});
      radii.push_back(rad);
      inside.push_back(ok);
    }
    double onset = kNaN;
    for (std::size_t i = inside.size(); i-- > 0;) {
      if (!inside[i]) break;
      onset = radii[i] / m;
    }
    onsets[std::to_string(m)] = std::isnan(onset) ? nlohmann::json(nullptr) : nlohmann::json(onset);
    pass = pass && !std::isnan(onset);
  }
  r.metrics = {{"delta", delta}, {"r_max", r_max}, {"onset_r_over_m", onsets}};
  r.pass = pass;
  return r;
}

std::vector<double> sandwich_radii(const RunConfig& cfg) {
  return cfg.dim == 1 ? std::vector<double>{60.0, 100.0} : std::vector<double>{40.0};
}

CheckReport density_bounds(const RunConfig& cfg) {
  CheckReport r;
  r.check = "density-bounds";
  r.anchor = "exponential density estimate of the marginal, -r(f'(g) -+ (1 -+ delta)/g)";
  const double delta = 0.5;
  const auto radii = sandwich_radii(cfg);
  auto table = shared_table(cfg, radii.back() + 2.0);
  const GSolver general = general_solver(cfg);
  r.sweep.columns = {"r", "t", "lower", "log_density", "upper", "dominant_m", "r_over_g"};
  bool pass = true;
  for (double rad : radii) {
    const double t = std::sqrt(rad);
    MarginalDensity md(table, t, {.r_max = rad + 2.0, .truncation_tolerance = cfg.truncation_tolerance,
                                  .spacing = cfg.spacing, .workers = cfg.workers});
    const auto v = md.eval(rad);
    const auto b = exponential_density_bounds(general, rad, t, delta);
    const double g = general.solve(std::log(rad / t));
    r.sweep.rows.push_back({rad, t, b.lower, v.log_density, b.upper, double(v.dominant_m), rad / g});
    pass = pass && b.lower <= v.log_density && v.log_density <= b.upper;
  }
  r.metrics = {{"delta", delta}};
  r.pass = pass;
  return r;
}

CheckReport tails(const RunConfig& cfg) {
  CheckReport r;
  r.check = "tails";
  r.anchor = "exponential tail estimate of the marginal";
  const double delta = 0.5;
  const auto radii = sandwich_radii(cfg);
  auto table = shared_table(cfg, radii.back() + 2.0);
  const GSolver general = general_solver(cfg);
  r.sweep.columns = {"lambda", "t", "lower", "log_tail", "upper", "lower_plus_sign", "upper_plus_sign"};
  bool pass = true, printed_sign = true;
  for (double lambda : radii) {
    const double t = std::sqrt(lambda);
    MarginalDensity md(table, t, {.r_max = lambda + 2.0, .truncation_tolerance = cfg.truncation_tolerance,
                                  .spacing = cfg.spacing, .workers = cfg.workers});
    const auto e = tail_estimate(md, general, lambda, delta);
    r.sweep.rows.push_back({lambda, t, e.lower, e.log_tail, e.upper, e.lower_plus_sign, e.upper_plus_sign});
    pass = pass && e.lower <= e.log_tail && e.log_tail <= e.upper;
    printed_sign = printed_sign && e.lower_plus_sign <= e.log_tail && e.log_tail <= e.upper_plus_sign;
  }
  r.metrics = {{"delta", delta}, {"plus_sign_bounds_hold", printed_sign}};
  r.pass = pass;
  return r;
}

CheckReport bridge_limit(const RunConfig& cfg) {
  CheckReport r;
  r.check = "bridge-limit";
  r.anchor = "scaled bridge log-density limit on the segment and divergence off it";
  BridgeConfig line = cfg.bridge();
  line.horizon = 1.0;
  line.r_eps.reset();
  // The off-segment point needs a direction across x.
  BridgeConfig plane = line;
  std::vector<double> across;
  if (line.dim == 1) {
    plane.dim = 2;
    plane.endpoint = {line.endpoint[0], 0.0};
  }
  const double len = plane.endpoint_norm();
  across.assign(plane.endpoint.size(), 0.0);
  across[0] = -plane.endpoint[1] / len;
  across[1] = plane.endpoint[0] / len;
  std::vector<double> mid(line.endpoint.size()), off(plane.endpoint.size());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * line.endpoint[i];
  for (std::size_t i = 0; i < off.size(); ++i) off[i] = 0.5 * plane.endpoint[i] + 0.3 * len * across[i];

  r.sweep.columns = {"log_inv_eps", "speed", "defect_mid", "scaled_off"};
  std::vector<double> mids, offs;
  for (double L = 20.0; L <= 60.0; L += 10.0) {
    line.epsilon = plane.epsilon = std::exp(-L);
    const auto a = scaled_bridge_logdensity_defect(line, 0.5, mid);
    const auto b = scaled_bridge_logdensity_defect(plane, 0.5, off);
    r.sweep.rows.push_back({L, speed_function(line), a.value, b.value});
    mids.push_back(std::abs(a.value));
    offs.push_back(b.value);
  }
  r.metrics = {{"mid_defect_last", mids.back()}, {"off_last", offs.back()},
               {"mid_decreasing", strictly_decreasing(mids)}, {"off_increasing", strictly_increasing(offs)}};
  r.pass = strictly_decreasing(mids) && strictly_increasing(offs);
  return r;
}

CheckReport count_clt(const RunConfig& cfg) {
  CheckReport r;
  r.check = "count-clt";
  r.anchor = "Gaussian limit of the standardized jump count sqrt(k_eps)(N - m_{x,eps})";
  const auto& set = shared_samples(cfg);
  const auto js = jump_statistics(cfg.bridge(), set.paths);
  std::map<int, double> freq;
  for (const auto& p : set.paths) freq[p.count()] += 1.0 / static_cast<double>(set.paths.size());
  double tv = 0.0;
  r.sweep.columns = {"m", "empirical", "conditional_pmf"};
  for (int m = 1; m <= set.model->m_cap(); ++m) {
    const double p = std::exp(set.model->count_log_pmf(m));
    tv += std::abs(freq[m] - p);
    r.sweep.rows.push_back({double(m), freq[m], p});
  }
  tv *= 0.5;
  const bool mean_ok = std::abs(js.counts.mean) <= 3.0 * js.counts.mean_stderr;
  const bool var_ok = js.counts.variance >= 0.8 && js.counts.variance <= 1.2;
  r.metrics = {{"samples", set.paths.size()}, {"m_center", js.m_center}, {"k_scale", js.k_scale},
               {"k_scale_short", js.k_scale_short}, {"mean", js.counts.mean},
               {"mean_stderr", js.counts.mean_stderr}, {"variance", js.counts.variance},
               {"mean_count", js.mean_count}, {"total_variation", tv}, {"sampling_seconds", set.seconds}};
  r.pass = mean_ok && var_ok;
  return r;
}

CheckReport jump_clt(const RunConfig& cfg) {
  CheckReport r;
  r.check = "jump-clt";
  r.anchor = "Gaussian limit of the standardized first jump; mean jump size and count-size balance";
  const auto& set = shared_samples(cfg);
  const auto js = jump_statistics(cfg.bridge(), set.paths);
  bool pass = true;
  r.sweep.columns = {"component", "mean", "mean_stderr", "variance"};
  for (std::size_t i = 0; i < js.increments.size(); ++i) {
    const auto& c = js.increments[i];
    r.sweep.rows.push_back({double(i), c.mean, c.mean_stderr, c.variance});
    pass = pass && std::abs(c.mean) <= 3.0 * c.mean_stderr && c.variance >= 0.8 && c.variance <= 1.2;
  }
  const double size_ratio = js.mean_jump_norm / js.g;
  pass = pass && std::abs(size_ratio - 1.0) <= 0.1 && std::abs(js.balance - 1.0) <= 0.1;
  r.metrics = {{"samples", set.paths.size()}, {"g", js.g}, {"mean_jump_norm", js.mean_jump_norm},
               {"mean_jump_over_g", size_ratio}, {"balance", js.balance},
               {"raw_variance_along", js.raw_variance_along}};
  if (js.increments.size() > 1) r.metrics["raw_variance_across"] = js.raw_variance_across;
  r.pass = pass;
  return r;
}

CheckReport dtilde(const RunConfig& cfg) {
  CheckReport r;
  r.check = "dtilde";
  r.anchor = "consistency of the tail exponent with the classical constant d_alpha";
  r.sweep.columns = {"log_inv_eps", "time", "q", "g", "ratio_with_correction", "ratio_leading"};
  std::vector<double> first, second;
  for (double L : {1e2, 1e3, 1e4, 1e5}) {
    const double time = cfg.horizon * (cfg.r_eps ? *cfg.r_eps : std::exp(cfg.rho * L));
    const auto d = dtilde_consistency(cfg.model, cfg.dim, L, time);
    r.sweep.rows.push_back({L, time, d.q, d.g, d.ratio_with_correction, d.ratio_leading});
    first.push_back(std::abs(d.ratio_with_correction - 1.0));
    second.push_back(std::abs(d.ratio_leading - 1.0));
  }
  r.metrics = {{"d_alpha", dtilde_consistency(cfg.model, cfg.dim, 1e2, 1.0).d_alpha},
               {"error_with_correction", first.back()}, {"error_leading", second.back()}};
  r.pass = strictly_decreasing(first) && strictly_decreasing(second) && first.back() <= 0.15 &&
           second.back() <= 0.15;
  return r;
}

const std::vector<std::pair<std::string, Check>>& registry() {
  static const std::vector<std::pair<std::string, Check>> checks{
      {"g-limits", g_limits},         {"cancellation", cancellation}, {"conv-bounds", conv_bounds},
      {"density-bounds", density_bounds}, {"tails", tails},           {"bridge-limit", bridge_limit},
      {"count-clt", count_clt},       {"jump-clt", jump_clt},         {"dtilde", dtilde}};
  return checks;
}

}  // namespace

std::string SweepTable::to_csv() const {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  return out.str();
}

nlohmann::json CheckReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : sweep.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size() && i < sweep.columns.size(); ++i) obj[sweep.columns[i]] = row[i];
    rows.push_back(std::move(obj));
  }
  return {{"check", check}, {"pass", pass}, {"metrics", metrics}, {"sweep", rows}};
}

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : registry()) v.push_back(name);
    return v;
  }();
  return names;
}

CheckReport run_check(const std::string& name, const RunConfig& cfg) {
  cfg.validate();
  for (const auto& [key, fn] : registry()) {
    if (key == name) return fn(cfg);
  }
  throw std::invalid_argument("unknown check: " + name);
}

std::string markdown_report(const std::vector<CheckReport>& reports, const RunConfig& cfg) {
  std::ostringstream out;
  out << "# Validation report\n\n";
  out << "Model alpha = " << cfg.model.alpha() << ", dimension " << cfg.dim << ", eps = " << cfg.epsilon
      << ", rho = " << cfg.rho << ", T = " << cfg.horizon << ", " << cfg.samples << " bridge samples, seed "
      << cfg.seed << ".\n\n";
  out << "| check | result | statement | metrics |\n|---|---|---|---|\n";
  int passed = 0;
  for (const auto& r : reports) {
    passed += r.pass;
    out << "| " << r.check << " | " << (r.pass ? "pass" : "FAIL") << " | " << r.anchor << " | `"
        << r.metrics.dump() << "` |\n";
  }
  out << "\n" << passed << " of " << reports.size() << " checks pass.\n";
  return out.str();
}

}  // namespace levybridge
