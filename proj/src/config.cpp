#include "config.hpp"

#include <cmath>
#include <initializer_list>
#include <stdexcept>

namespace levybridge {

namespace {

void reject_unknown(const nlohmann::json& j, const std::string& section,
                    std::initializer_list<const char*> known) {
  if (!j.is_object()) throw std::invalid_argument(section + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (const char* k : known) found = found || key == k;
    if (!found) throw std::invalid_argument("unknown key " + section + "." + key);
  }
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument("wrong type for " + section + "." + key);
  }
}

}  // namespace

OutputFormat parse_output_format(const std::string& name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  if (name == "jsonl") return OutputFormat::Jsonl;
  throw std::invalid_argument("unknown output format: " + name);
}

std::string output_format_name(OutputFormat format) {
  switch (format) {
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Json: return "json";
    case OutputFormat::Jsonl: return "jsonl";
  }
  return "json";
}

BridgeConfig RunConfig::bridge() const {
  BridgeConfig b;
  b.fun = model;
  b.dim = dim;
  b.epsilon = epsilon;
  b.rho = rho;
  b.r_eps = r_eps;
  b.horizon = horizon;
  b.endpoint = endpoint;
  b.seed = seed;
  return b;
}

void RunConfig::validate() const {
  bridge().validate();
  if (!(spacing >= 0.0) || !std::isfinite(spacing)) throw std::invalid_argument("numerics.spacing must be >= 0");
  if (m_cap < 0) throw std::invalid_argument("numerics.m_cap must be >= 0");
  if (workers < 0) throw std::invalid_argument("numerics.workers must be >= 0");
  if (!(truncation_tolerance > 0.0 && truncation_tolerance < 1.0)) {
    throw std::invalid_argument("numerics.truncation_tolerance must lie in (0, 1)");
  }
  if (samples == 0) throw std::invalid_argument("sampling.samples must be positive");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["model"] = model.to_json();
  j["dim"] = dim;
  j["bridge"] = {{"epsilon", epsilon}, {"rho", rho}, {"horizon", horizon}, {"endpoint", endpoint}};
  j["bridge"]["r_eps"] = r_eps ? nlohmann::json(*r_eps) : nlohmann::json(nullptr);
  j["numerics"] = {{"spacing", spacing}, {"m_cap", m_cap}, {"workers", workers},
                   {"truncation_tolerance", truncation_tolerance}};
  j["sampling"] = {{"samples", samples}, {"seed", seed}};
  j["output"] = {{"format", output_format_name(format)}, {"path", path}};
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  reject_unknown(j, "config", {"model", "dim", "bridge", "numerics", "sampling", "output"});
  RunConfig c;
  if (j.contains("model")) c.model = RVFunction::from_json(j.at("model"));
  read(j, "dim", c.dim, "config");
  if (j.contains("bridge")) {
    const auto& b = j.at("bridge");
    reject_unknown(b, "bridge", {"epsilon", "rho", "r_eps", "horizon", "endpoint"});
    read(b, "epsilon", c.epsilon, "bridge");
    read(b, "rho", c.rho, "bridge");
    if (b.contains("r_eps") && !b.at("r_eps").is_null()) {
      double r = 0.0;
      read(b, "r_eps", r, "bridge");
      c.r_eps = r;
    }
    read(b, "horizon", c.horizon, "bridge");
    read(b, "endpoint", c.endpoint, "bridge");
  }
  if (j.contains("numerics")) {
    const auto& n = j.at("numerics");
    reject_unknown(n, "numerics", {"spacing", "m_cap", "workers", "truncation_tolerance"});
    read(n, "spacing", c.spacing, "numerics");
    read(n, "m_cap", c.m_cap, "numerics");
    read(n, "workers", c.workers, "numerics");
    read(n, "truncation_tolerance", c.truncation_tolerance, "numerics");
  }
  if (j.contains("sampling")) {
    const auto& s = j.at("sampling");
    reject_unknown(s, "sampling", {"samples", "seed"});
    read(s, "samples", c.samples, "sampling");
    read(s, "seed", c.seed, "sampling");
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    reject_unknown(o, "output", {"format", "path"});
    std::string format = output_format_name(c.format);
    read(o, "format", format, "output");
    c.format = parse_output_format(format);
    read(o, "path", c.path, "output");
  }
  c.validate();
  return c;
}

bool operator==(const RunConfig& a, const RunConfig& b) { return a.to_json() == b.to_json(); }

}  // namespace levybridge
