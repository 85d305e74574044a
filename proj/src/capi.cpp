#include "levybridge/levybridge.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "errors.hpp"
#include "ldp.hpp"
#include "marginal.hpp"
#include "validation.hpp"

struct lb_config {
  levybridge::RunConfig value;
};

struct lb_solver {
  levybridge::GSolver value;
};

struct lb_convolution {
  std::unique_ptr<levybridge::ConvolutionTable> table;
};

struct lb_marginal {
  std::unique_ptr<levybridge::MarginalDensity> density;
  std::unique_ptr<levybridge::GSolver> general;
};

struct lb_bridge {
  std::unique_ptr<levybridge::BridgeModel> model;
};

namespace {

using namespace levybridge;

thread_local std::string last_error;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

lb_status fail(lb_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class Body>
lb_status guarded(Body&& body) {
  last_error.clear();
  try {
    body();
    return LB_OK;
  } catch (const DomainError& e) {
    return fail(LB_ERR_DOMAIN, e.what());
  } catch (const std::domain_error& e) {
    return fail(LB_ERR_DOMAIN, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(LB_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(LB_ERR_INVALID_ARGUMENT, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(LB_ERR_INVALID_ARGUMENT, e.what());
  } catch (const NumericFailure& e) {
    return fail(LB_ERR_NUMERIC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(LB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LB_ERR_INTERNAL, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Shortest text that reads back to the same double; nan and inf spelled out.
std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::string csv_line(std::initializer_list<double> values) {
  std::string line;
  bool first = true;
  for (double v : values) {
    if (!first) line += ',';
    line += number(v);
    first = false;
  }
  return line + '\n';
}

#define LB_REQUIRE(ptr)                                               \
  do {                                                                \
    if (!(ptr)) return fail(LB_ERR_NULL, #ptr " must not be NULL"); \
  } while (0)

}  // namespace

extern "C" {

const char* lb_version(void) { return "1.0.0"; }

const char* lb_status_name(lb_status status) {
  switch (status) {
    case LB_OK: return "ok";
    case LB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LB_ERR_DOMAIN: return "domain error";
    case LB_ERR_NUMERIC: return "numeric failure";
    case LB_ERR_INTERNAL: return "internal error";
    case LB_ERR_NULL: return "null pointer";
  }
  return "unknown status";
}

const char* lb_last_error(void) { return last_error.c_str(); }

void lb_string_free(char* s) { std::free(s); }

lb_status lb_config_new(lb_config** out) {
  LB_REQUIRE(out);
  return guarded([&] { *out = new lb_config{}; });
}

lb_status lb_config_from_json(const char* json, lb_config** out) {
  LB_REQUIRE(json);
  LB_REQUIRE(out);
  return guarded([&] { *out = new lb_config{RunConfig::from_json(nlohmann::json::parse(json))}; });
}

lb_status lb_config_merge_json(lb_config* config, const char* json) {
  LB_REQUIRE(config);
  LB_REQUIRE(json);
  return guarded([&] {
    nlohmann::json merged = config->value.to_json();
    merged.merge_patch(nlohmann::json::parse(json));
    config->value = RunConfig::from_json(merged);
  });
}

lb_status lb_config_to_json(const lb_config* config, char** out) {
  LB_REQUIRE(config);
  LB_REQUIRE(out);
  return guarded([&] { *out = copy_string(config->value.to_json().dump()); });
}

void lb_config_free(lb_config* config) { delete config; }

lb_status lb_solver_new(const lb_config* config, const char* variant, const double* custom_k, lb_solver** out) {
  LB_REQUIRE(config);
  LB_REQUIRE(variant);
  LB_REQUIRE(out);
  return guarded([&] {
    const RunConfig& c = config->value;
    EquationSpec spec{c.model, c.dim, parse_variant(variant), {}};
    if (spec.variant == Variant::CustomK) {
      if (!custom_k) throw std::invalid_argument("the custom variant needs four k coefficients");
      spec.custom = {custom_k[0], custom_k[1], custom_k[2], custom_k[3]};
    }
    *out = new lb_solver{GSolver(spec)};
  });
}

lb_status lb_solver_floor(const lb_solver* solver, double* log_lambda_floor) {
  LB_REQUIRE(solver);
  LB_REQUIRE(log_lambda_floor);
  *log_lambda_floor = solver->value.log_lambda_floor();
  return LB_OK;
}

lb_status lb_solver_solve(const lb_solver* solver, double log_lambda, double* g) {
  LB_REQUIRE(solver);
  LB_REQUIRE(g);
  return guarded([&] { *g = solver->value.solve(log_lambda); });
}

lb_status lb_solver_report_json(const lb_solver* solver, double log_lambda, char** out) {
  LB_REQUIRE(solver);
  LB_REQUIRE(out);
  return guarded([&] {
    const GSolver& s = solver->value;
    const double g = s.solve(log_lambda);
    const auto ratios = s.limit_diagnostics(log_lambda);
    const auto targets = LimitRatios::targets(s.spec().fun.alpha());
    const auto& k = s.correction();
    nlohmann::json diagnostics = {
        {"variant", variant_name(s.spec().variant)},
        {"log_lambda", log_lambda},
        {"log_lambda_floor", s.log_lambda_floor()},
        {"dg_dlog_lambda", s.dg_dlog_lambda(log_lambda)},
        {"ratios", {{"log_derivative", ratios.log_derivative}, {"f_ratio", ratios.f_ratio},
                    {"fprime_ratio", ratios.fprime_ratio}, {"legendre_ratio", ratios.legendre_ratio}}},
        {"ratio_targets", {{"log_derivative", targets.log_derivative}, {"f_ratio", targets.f_ratio},
                           {"fprime_ratio", targets.fprime_ratio}, {"legendre_ratio", targets.legendre_ratio}}},
        {"g_over_asymptote", g / std::pow(log_lambda, 1.0 / s.spec().fun.alpha()) /
                                 asymptotic_g_limit(s.spec().fun.alpha())},
        {"k", {{"log_y", k.log_y}, {"log_fpp", k.log_fpp}, {"curvature", k.curvature}, {"constant", k.constant}}}};
    const nlohmann::json report = {{"g", g}, {"residual", s.residual(log_lambda, g)}, {"diagnostics", diagnostics}};
    *out = copy_string(report.dump());
  });
}

void lb_solver_free(lb_solver* solver) { delete solver; }

lb_status lb_convolution_new(const lb_config* config, int max_order, double r_max, lb_convolution** out) {
  LB_REQUIRE(config);
  LB_REQUIRE(out);
  return guarded([&] {
    const RunConfig& c = config->value;
    if (max_order < 1) throw std::invalid_argument("order must be at least 1");
    auto table = std::make_unique<ConvolutionTable>(c.model, c.dim, max_order,
                                                    ConvolutionOptions{r_max, c.spacing, c.workers});
    *out = new lb_convolution{std::move(table)};
  });
}

lb_status lb_convolution_log_density(const lb_convolution* table, int order, double r, double* out) {
  LB_REQUIRE(table);
  LB_REQUIRE(out);
  return guarded([&] { *out = table->table->log_density(order, r); });
}

lb_status lb_convolution_csv(const lb_convolution* table, int order, double delta, char** out) {
  LB_REQUIRE(table);
  LB_REQUIRE(out);
  return guarded([&] {
    const ConvolutionTable& t = *table->table;
    if (order < 1 || order > t.max_order()) throw std::invalid_argument("order outside the table");
    std::string csv = "r,log_density,lower_bound,upper_bound\n";
    const double h = t.spacing();
    const auto nodes = static_cast<long>(std::floor(t.r_max() / h + 1e-9));
    for (long i = 0; i <= nodes; ++i) {
      const double r = static_cast<double>(i) * h;
      LogBounds b{kNaN, kNaN};
      try {
        b = convolution_power_bounds(t.fun(), t.dim(), order, r, delta);
      } catch (const DomainError&) {
      }
      csv += csv_line({r, t.log_density(order, r), b.lower, b.upper});
    }
    *out = copy_string(csv);
  });
}

void lb_convolution_free(lb_convolution* table) { delete table; }

lb_status lb_marginal_new(const lb_config* config, double time, double r_max, lb_marginal** out) {
  LB_REQUIRE(config);
  LB_REQUIRE(out);
  return guarded([&] {
    const RunConfig& c = config->value;
    MarginalOptions options{r_max, c.m_cap, c.truncation_tolerance, c.spacing, c.workers};
    auto density = std::make_unique<MarginalDensity>(c.model, c.dim, time, options);
    auto general = std::make_unique<GSolver>(EquationSpec{c.model, c.dim, Variant::General, {}});
    *out = new lb_marginal{std::move(density), std::move(general)};
  });
}

lb_status lb_marginal_log_density(const lb_marginal* marginal, double r, double* log_density, int* dominant_m) {
  LB_REQUIRE(marginal);
  LB_REQUIRE(log_density);
  return guarded([&] {
    const auto v = marginal->density->eval(r);
    *log_density = v.log_density;
    if (dominant_m) *dominant_m = v.dominant_m;
  });
}

lb_status lb_marginal_log_tail(const lb_marginal* marginal, double lambda, double* out) {
  LB_REQUIRE(marginal);
  LB_REQUIRE(out);
  return guarded([&] { *out = marginal->density->log_tail(lambda); });
}

lb_status lb_marginal_csv(const lb_marginal* marginal, double delta, double step, char** out) {
  LB_REQUIRE(marginal);
  LB_REQUIRE(out);
  return guarded([&] {
    if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
    const MarginalDensity& md = *marginal->density;
    std::string csv = "r,log_mu,lower,upper,dominant_m\n";
    const auto nodes = static_cast<long>(std::floor(md.r_max() / step + 1e-9));
    for (long i = 1; i <= nodes; ++i) {
      const double r = static_cast<double>(i) * step;
      const auto v = md.eval(r);
      LogSandwich b{kNaN, kNaN};
      try {
        b = exponential_density_bounds(*marginal->general, r, md.time(), delta);
      } catch (const DomainError&) {
      }
      csv += csv_line({r, v.log_density, b.lower, b.upper, static_cast<double>(v.dominant_m)});
    }
    *out = copy_string(csv);
  });
}

lb_status lb_marginal_tail_csv(const lb_marginal* marginal, double delta, double step, char** out) {
  LB_REQUIRE(marginal);
  LB_REQUIRE(out);
  return guarded([&] {
    if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
    const MarginalDensity& md = *marginal->density;
    std::string csv = "lambda,log_tail,lower,upper,lower_plus_sign,upper_plus_sign\n";
    const auto nodes = static_cast<long>(std::floor(md.r_max() / step + 1e-9));
    for (long i = 1; i <= nodes; ++i) {
      const double lambda = static_cast<double>(i) * step;
      TailEstimate e{md.log_tail(lambda), kNaN, kNaN, kNaN, kNaN};
      try {
        e = tail_estimate(md, *marginal->general, lambda, delta);
      } catch (const DomainError&) {
      }
      csv += csv_line({lambda, e.log_tail, e.lower, e.upper, e.lower_plus_sign, e.upper_plus_sign});
    }
    *out = copy_string(csv);
  });
}

void lb_marginal_free(lb_marginal* marginal) { delete marginal; }

lb_status lb_bridge_new(const lb_config* config, lb_bridge** out) {
  LB_REQUIRE(config);
  LB_REQUIRE(out);
  return guarded([&] {
    const RunConfig& c = config->value;
    c.validate();
    *out = new lb_bridge{std::make_unique<BridgeModel>(c.bridge(), c.numerics())};
  });
}

lb_status lb_bridge_count_log_pmf(const lb_bridge* bridge, int m, double* out) {
  LB_REQUIRE(bridge);
  LB_REQUIRE(out);
  return guarded([&] { *out = bridge->model->count_log_pmf(m); });
}

lb_status lb_bridge_sample_jsonl(const lb_bridge* bridge, uint64_t first, uint64_t count, int workers,
                                 char** out) {
  LB_REQUIRE(bridge);
  LB_REQUIRE(out);
  return guarded([&] {
    const auto paths = bridge->model->sample_many(first, static_cast<std::size_t>(count), workers);
    std::string text;
    for (const auto& p : paths) {
      const nlohmann::json line = {{"sample", p.sample}, {"jump_times", p.jump_times}, {"jumps", p.jumps},
                                   {"count", p.count()}, {"method_flag", p.method_flag}};
      text += line.dump();
      text += '\n';
    }
    *out = copy_string(text);
  });
}

void lb_bridge_free(lb_bridge* bridge) { delete bridge; }

lb_status lb_speed(const lb_config* config, double* out) {
  LB_REQUIRE(config);
  LB_REQUIRE(out);
  return guarded([&] { *out = speed_function(config->value.bridge()); });
}

lb_status lb_rate(const lb_config* config, const double* times, const double* points, size_t count,
                  double* value, int* admissible, char** violations_json) {
  LB_REQUIRE(config);
  LB_REQUIRE(value);
  if (count > 0) {
    LB_REQUIRE(times);
    LB_REQUIRE(points);
  }
  return guarded([&] {
    const RunConfig& c = config->value;
    const auto dim = static_cast<std::size_t>(c.dim);
    std::vector<double> t(times, times + count);
    std::vector<std::vector<double>> y(count);
    for (std::size_t i = 0; i < count; ++i) y[i].assign(points + i * dim, points + (i + 1) * dim);
    const auto eval = finite_dim_rate(c.bridge(), t, y);
    *value = eval.value;
    if (admissible) *admissible = eval.admissible ? 1 : 0;
    if (violations_json) *violations_json = copy_string(nlohmann::json(eval.violations).dump());
  });
}

size_t lb_check_count(void) { return check_names().size(); }

const char* lb_check_name(size_t index) {
  const auto& names = check_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

lb_status lb_validate(const lb_config* config, const char* check, int* pass, char** report_json,
                      char** sweep_csv) {
  LB_REQUIRE(config);
  LB_REQUIRE(check);
  return guarded([&] {
    const auto report = run_check(check, config->value);
    if (pass) *pass = report.pass ? 1 : 0;
    if (report_json) *report_json = copy_string(report.to_json().dump());
    if (sweep_csv) *sweep_csv = copy_string(report.sweep.to_csv());
  });
}

lb_status lb_report(const lb_config* config, int* all_pass, char** markdown) {
  LB_REQUIRE(config);
  LB_REQUIRE(markdown);
  return guarded([&] {
    std::vector<CheckReport> reports;
    bool ok = true;
    config->value.validate();
    for (const auto& name : check_names()) {
      try {
        reports.push_back(run_check(name, config->value));
      } catch (const std::exception& e) {
        CheckReport failed;
        failed.check = name;
        failed.anchor = "not evaluated";
        failed.metrics = {{"error", e.what()}};
        reports.push_back(std::move(failed));
      }
      ok = ok && reports.back().pass;
    }
    if (all_pass) *all_pass = ok ? 1 : 0;
    *markdown = copy_string(markdown_report(reports, config->value));
  });
}

}  // extern "C"
