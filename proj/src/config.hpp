#pragma once

// Run configuration shared by the CLI subcommands and the validation battery.
// JSON layout:
//   {"model": {alpha, scale, beta, domain_floor}, "dim": n,
//    "bridge": {epsilon, rho, r_eps, horizon, endpoint},
//    "numerics": {spacing, m_cap, workers, truncation_tolerance},
//    "sampling": {samples, seed}, "output": {format, path}}

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bridge.hpp"

namespace levybridge {

enum class OutputFormat { Csv, Json, Jsonl };

OutputFormat parse_output_format(const std::string& name);
std::string output_format_name(OutputFormat format);

struct RunConfig {
  RVFunction model{2.0};
  int dim = 1;

  double epsilon = 0.02;
  double rho = 0.0;
  std::optional<double> r_eps;
  double horizon = 1.0;
  std::vector<double> endpoint{1.0};

  double spacing = 0.0;
  int m_cap = 0;
  int workers = 0;
  double truncation_tolerance = 1e-12;

  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;

  OutputFormat format = OutputFormat::Json;
  /// Empty means standard output.
  std::string path;

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;

  BridgeConfig bridge() const;
  BridgeNumerics numerics() const { return {spacing, m_cap, workers}; }

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& j);
};

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace levybridge
