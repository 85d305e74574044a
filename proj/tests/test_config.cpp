#include <doctest.h>

#include <random>
#include <stdexcept>

#include "config.hpp"

using namespace levybridge;

TEST_SUITE("config") {

TEST_CASE("defaults validate and serialize every section") {
  const RunConfig c;
  CHECK_NOTHROW(c.validate());
  const auto j = c.to_json();
  for (const char* key : {"model", "dim", "bridge", "numerics", "sampling", "output"}) CHECK(j.contains(key));
  CHECK(j["bridge"]["r_eps"].is_null());
  CHECK(j["output"]["format"] == "json");
}

TEST_CASE("round trip is field-identical on random configurations") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    RunConfig c;
    c.model = RVFunction(1.2 + 2.5 * unit(rng), 0.5 + unit(rng));
    c.dim = 1 + static_cast<int>(rng() % 3);
    c.endpoint.assign(static_cast<std::size_t>(c.dim), 0.0);
    for (auto& v : c.endpoint) v = unit(rng) - 0.5;
    c.endpoint[0] += 1.0;
    c.epsilon = 1e-3 + 0.1 * unit(rng);
    c.rho = unit(rng);
    if (trial % 3 == 0) c.r_eps = 1.0 + 10.0 * unit(rng);
    c.horizon = 0.1 + 3.0 * unit(rng);
    c.spacing = 0.01 * unit(rng);
    c.m_cap = static_cast<int>(rng() % 50);
    c.workers = static_cast<int>(rng() % 8);
    c.truncation_tolerance = 1e-14 + 1e-6 * unit(rng);
    c.samples = 1 + rng() % 100000;
    c.seed = rng();
    c.format = static_cast<OutputFormat>(rng() % 3);
    c.path = trial % 2 ? "" : "out-" + std::to_string(trial);

    const RunConfig back = RunConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
    CHECK(back == c);
    CHECK(back.seed == c.seed);
    CHECK(back.r_eps == c.r_eps);
    CHECK(back.endpoint == c.endpoint);
    CHECK(back.model.alpha() == c.model.alpha());
  }
}

TEST_CASE("missing keys keep their defaults") {
  const auto c = RunConfig::from_json(nlohmann::json::parse(R"({"bridge": {"epsilon": 0.05}})"));
  CHECK(c.epsilon == 0.05);
  CHECK(c.samples == RunConfig{}.samples);
  CHECK(c.endpoint == std::vector<double>{1.0});
}

TEST_CASE("unknown keys, wrong types and invalid values are rejected") {
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"extra": 1})")), std::invalid_argument);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"bridge": {"eps": 0.1}})")), std::invalid_argument);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"dim": "two"})")), std::invalid_argument);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"bridge": {"epsilon": -1}})")), std::invalid_argument);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"dim": 2})")), std::invalid_argument);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"output": {"format": "xml"}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"sampling": {"samples": 0}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse("[]")), std::invalid_argument);
}

TEST_CASE("output format names") {
  for (auto f : {OutputFormat::Csv, OutputFormat::Json, OutputFormat::Jsonl}) {
    CHECK(parse_output_format(output_format_name(f)) == f);
  }
  CHECK_THROWS_AS(parse_output_format("yaml"), std::invalid_argument);
}

}
