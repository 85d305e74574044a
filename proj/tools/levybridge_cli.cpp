// Command-line front end. It talks to the library only through the C interface.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "levybridge/levybridge.h"

namespace {

constexpr int kExitValidationFailure = 1;
constexpr int kExitUsage = 2;

struct Failure {
  int exit_code;
  std::string message;
};

void check(lb_status status) {
  if (status != LB_OK) {
    throw Failure{kExitUsage, std::string(lb_status_name(status)) + ": " + lb_last_error()};
  }
}

struct StringDeleter {
  void operator()(char* s) const { lb_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

template <class T, void (*Free)(T*)>
struct HandleDeleter {
  void operator()(T* p) const { Free(p); }
};
using Config = std::unique_ptr<lb_config, HandleDeleter<lb_config, lb_config_free>>;
using Solver = std::unique_ptr<lb_solver, HandleDeleter<lb_solver, lb_solver_free>>;
using Convolution = std::unique_ptr<lb_convolution, HandleDeleter<lb_convolution, lb_convolution_free>>;
using Marginal = std::unique_ptr<lb_marginal, HandleDeleter<lb_marginal, lb_marginal_free>>;
using Bridge = std::unique_ptr<lb_bridge, HandleDeleter<lb_bridge, lb_bridge_free>>;

// Settings that every subcommand accepts; unset flags leave the config file alone.
struct Overrides {
  std::string config_path;
  std::optional<double> alpha, scale, eps, rho, r_eps, horizon;
  std::optional<int> dim, workers, m_cap;
  std::optional<std::vector<double>> endpoint;
  std::optional<std::uint64_t> samples, seed;
  std::optional<std::string> format, output;

  nlohmann::json patch() const {
    nlohmann::json p = nlohmann::json::object();
    if (alpha) p["model"]["alpha"] = *alpha;
    if (scale) p["model"]["scale"] = *scale;
    if (dim) p["dim"] = *dim;
    if (eps) p["bridge"]["epsilon"] = *eps;
    if (rho) p["bridge"]["rho"] = *rho;
    if (r_eps) p["bridge"]["r_eps"] = *r_eps;
    if (horizon) p["bridge"]["horizon"] = *horizon;
    if (endpoint) p["bridge"]["endpoint"] = *endpoint;
    if (workers) p["numerics"]["workers"] = *workers;
    if (m_cap) p["numerics"]["m_cap"] = *m_cap;
    if (samples) p["sampling"]["samples"] = *samples;
    if (seed) p["sampling"]["seed"] = *seed;
    if (format) p["output"]["format"] = *format;
    if (output) p["output"]["path"] = *output;
    return p;
  }
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app->add_option("--alpha", o.alpha, "Index of regular variation of f");
  app->add_option("--scale", o.scale, "Scale c in f(x) = c x^alpha");
  app->add_option("--dim", o.dim, "Dimension n");
  app->add_option("--workers", o.workers, "Worker threads (0 = LEVYBRIDGE_WORKERS or all cores)");
  app->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json", "jsonl"}));
  app->add_option("--output", o.output, "Output file (default: standard output)");
}

void add_bridge(CLI::App* app, Overrides& o) {
  app->add_option("--eps", o.eps, "Scaling parameter epsilon");
  app->add_option("--rho", o.rho, "Time exponent, r_eps = eps^-rho");
  app->add_option("--r-eps", o.r_eps, "Explicit time scale r_eps (overrides --rho)");
  app->add_option("--horizon", o.horizon, "Horizon T");
  app->add_option("--endpoint", o.endpoint, "Endpoint x1[,x2,x3]")->delimiter(',');
  app->add_option("--m-cap", o.m_cap, "Truncation order override");
  app->add_option("--samples", o.samples, "Number of bridge paths");
  app->add_option("--seed", o.seed, "Random seed");
}

Config load_config(const Overrides& o) {
  lb_config* raw = nullptr;
  if (o.config_path.empty()) {
    check(lb_config_new(&raw));
  } else {
    std::ifstream in(o.config_path);
    std::stringstream text;
    text << in.rdbuf();
    check(lb_config_from_json(text.str().c_str(), &raw));
  }
  Config config(raw);
  const auto patch = o.patch();
  // A lone endpoint in a different dimension would fail validation before the
  // dimension flag lands, so both are applied in one patch.
  check(lb_config_merge_json(config.get(), patch.dump().c_str()));
  return config;
}

nlohmann::json config_json(const Config& config) {
  char* raw = nullptr;
  check(lb_config_to_json(config.get(), &raw));
  OwnedString owned(raw);
  return nlohmann::json::parse(owned.get());
}

// Standard output unless the configuration names a file.
class Sink {
public:
  explicit Sink(const nlohmann::json& cfg) {
    const std::string path = cfg["output"]["path"].get<std::string>();
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw Failure{kExitUsage, "cannot open output file " + path};
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
  std::ofstream file_;
};

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run_solve_g(const Overrides& o, const std::string& variant, double log_lambda, const std::vector<double>& k) {
  Config config = load_config(o);
  if (!k.empty() && k.size() != 4) throw Failure{kExitUsage, "--k takes four coefficients"};
  lb_solver* raw = nullptr;
  check(lb_solver_new(config.get(), variant.c_str(), k.empty() ? nullptr : k.data(), &raw));
  Solver solver(raw);
  char* text = nullptr;
  check(lb_solver_report_json(solver.get(), log_lambda, &text));
  OwnedString owned(text);
  Sink sink(config_json(config));
  sink.stream() << owned.get() << '\n';
  return 0;
}

int run_convpow(const Overrides& o, int order, double r_max, double delta) {
  Config config = load_config(o);
  lb_convolution* raw = nullptr;
  check(lb_convolution_new(config.get(), order, r_max, &raw));
  Convolution table(raw);
  char* text = nullptr;
  check(lb_convolution_csv(table.get(), order, delta, &text));
  OwnedString owned(text);
  Sink sink(config_json(config));
  sink.stream() << owned.get();
  return 0;
}

int run_marginal(const Overrides& o, double time, double r_max, double delta, double step) {
  Config config = load_config(o);
  lb_marginal* raw = nullptr;
  check(lb_marginal_new(config.get(), time, r_max, &raw));
  Marginal marginal(raw);
  char* density = nullptr;
  check(lb_marginal_csv(marginal.get(), delta, step, &density));
  OwnedString owned_density(density);
  char* tail = nullptr;
  check(lb_marginal_tail_csv(marginal.get(), delta, step, &tail));
  OwnedString owned_tail(tail);
  Sink sink(config_json(config));
  sink.stream() << owned_density.get() << '\n' << owned_tail.get();
  return 0;
}

int run_bridge_sample(const Overrides& o) {
  Config config = load_config(o);
  const auto cfg = config_json(config);
  lb_bridge* raw = nullptr;
  check(lb_bridge_new(config.get(), &raw));
  Bridge bridge(raw);
  const std::uint64_t samples = cfg["sampling"]["samples"].get<std::uint64_t>();
  const int workers = cfg["numerics"]["workers"].get<int>();
  constexpr std::uint64_t kChunk = 4096;
  Sink sink(cfg);
  for (std::uint64_t first = 0; first < samples; first += kChunk) {
    char* text = nullptr;
    check(lb_bridge_sample_jsonl(bridge.get(), first, std::min(kChunk, samples - first), workers, &text));
    OwnedString owned(text);
    sink.stream() << owned.get();
  }
  return 0;
}

int run_rate(const Overrides& o, bool linear, const std::vector<double>& times, const std::vector<double>& points) {
  Config config = load_config(o);
  const auto cfg = config_json(config);
  const auto dim = cfg["dim"].get<std::size_t>();
  if (linear && !times.empty()) throw Failure{kExitUsage, "--linear takes no --times"};
  if (points.size() != times.size() * dim) {
    throw Failure{kExitUsage, "--points needs dim coordinates per time"};
  }
  double value = 0.0;
  int admissible = 0;
  char* violations = nullptr;
  check(lb_rate(config.get(), times.data(), points.data(), times.size(), &value, &admissible, &violations));
  OwnedString owned(violations);
  Sink sink(cfg);
  sink.stream() << format_number(value) << '\n';
  if (!admissible) std::cerr << "inadmissible: " << owned.get() << '\n';
  return 0;
}

int run_validate(const Overrides& o, const std::string& name) {
  Config config = load_config(o);
  const auto cfg = config_json(config);
  int pass = 0;
  char* report = nullptr;
  char* sweep = nullptr;
  check(lb_validate(config.get(), name.c_str(), &pass, &report, &sweep));
  OwnedString owned_report(report), owned_sweep(sweep);
  Sink sink(cfg);
  const std::string format = cfg["output"]["format"].get<std::string>();
  if (format == "csv") {
    sink.stream() << owned_sweep.get();
  } else if (format == "jsonl") {
    sink.stream() << owned_report.get() << '\n';
  } else {
    sink.stream() << nlohmann::json::parse(owned_report.get()).dump(2) << '\n';
  }
  return pass ? 0 : kExitValidationFailure;
}

int run_report(const Overrides& o) {
  Config config = load_config(o);
  int all_pass = 0;
  char* markdown = nullptr;
  check(lb_report(config.get(), &all_pass, &markdown));
  OwnedString owned(markdown);
  Sink sink(config_json(config));
  sink.stream() << owned.get();
  return all_pass ? 0 : kExitValidationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Levy bridges with light-tailed jumps: solver, densities, sampler and validation"};
  app.require_subcommand(1);

  Overrides o;

  auto* solve_g = app.add_subcommand("solve-g", "Solve the functional equation for g");
  add_common(solve_g, o);
  std::string variant = "general";
  double log_lambda = 0.0;
  std::vector<double> k;
  solve_g->add_option("--variant", variant, "simplified, general, g-zero or custom-k");
  solve_g->add_option("--log-lambda", log_lambda, "ln Lambda")->required();
  solve_g->add_option("--k", k, "Coefficients log_y,log_fpp,curvature,constant of k")->delimiter(',');

  auto* convpow = app.add_subcommand("convpow", "Log density of a convolution power of the jump measure");
  add_common(convpow, o);
  int order = 1;
  double conv_rmax = 20.0, conv_delta = 0.2;
  convpow->add_option("--order", order, "Convolution order m")->required()->check(CLI::PositiveNumber);
  convpow->add_option("--rmax", conv_rmax, "Largest radius");
  convpow->add_option("--delta", conv_delta, "Slack of the sandwich bounds");

  auto* marginal = app.add_subcommand("marginal", "Marginal density and tail of the process");
  add_common(marginal, o);
  double time = 1.0, marg_rmax = 20.0, marg_delta = 0.5, step = 0.5;
  marginal->add_option("--time", time, "Time t")->required();
  marginal->add_option("--rmax", marg_rmax, "Largest radius");
  marginal->add_option("--delta", marg_delta, "Slack of the sandwich bounds");
  marginal->add_option("--step", step, "Radius step of the tables");

  auto* bridge = app.add_subcommand("bridge-sample", "Sample bridge paths as JSON lines");
  add_common(bridge, o);
  add_bridge(bridge, o);

  auto* rate = app.add_subcommand("rate", "Entropy rate of a path through given points");
  add_common(rate, o);
  add_bridge(rate, o);
  bool linear = false;
  std::vector<double> times, points;
  rate->add_flag("--linear", linear, "Rate of the straight path from 0 to x");
  rate->add_option("--times", times, "Intermediate times")->delimiter(',');
  rate->add_option("--points", points, "Intermediate points, dim coordinates each")->delimiter(',');

  auto* validate = app.add_subcommand("validate", "Run one validation check");
  add_common(validate, o);
  add_bridge(validate, o);
  std::string check_name;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < lb_check_count(); ++i) names.emplace_back(lb_check_name(i));
  validate->add_option("--check", check_name, "Check to run")->required()->check(CLI::IsMember(names));

  auto* report = app.add_subcommand("report", "Run every check and print a Markdown summary");
  add_common(report, o);
  add_bridge(report, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*solve_g) return run_solve_g(o, variant, log_lambda, k);
    if (*convpow) return run_convpow(o, order, conv_rmax, conv_delta);
    if (*marginal) return run_marginal(o, time, marg_rmax, marg_delta, step);
    if (*bridge) return run_bridge_sample(o);
    if (*rate) return run_rate(o, linear, times, points);
    if (*validate) return run_validate(o, check_name);
    if (*report) return run_report(o);
  } catch (const Failure& f) {
    std::cerr << "levybridge: " << f.message << '\n';
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "levybridge: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
