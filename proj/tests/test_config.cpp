#include <algorithm>
#include <cmath>
#include <sstream>

#include "chaoslab/suites.hpp"
#include "doctest.h"

using namespace chaoslab;
using doctest::Approx;
using nlohmann::json;

TEST_CASE("run config parsing") {
  const RunConfig c = RunConfig::from_json(json::parse(R"({
    "q": 3, "H": 0.3, "n": [64, 128], "m": 500, "seed": 11, "weight": "cos:1,2",
    "normalization": "scaled", "method": "circulant", "tolerances": {"ks_alpha": 0.05},
    "decompose": true, "n_fine": 2048, "subcommand": "variation"})"));
  CHECK(c.q == 3);
  CHECK(*c.hurst == 0.3);
  CHECK(c.n == std::vector<std::size_t>{64, 128});
  CHECK(c.m == 500u);
  CHECK(c.seed == 11u);
  CHECK(c.normalization == Normalization::scaled);
  CHECK(c.method == SamplingMethod::circulant);
  CHECK(c.tolerance("ks_alpha", 0.01) == 0.05);
  CHECK(c.tolerance("missing", 0.01) == 0.01);
  CHECK(c.decompose);
  CHECK(c.n_fine == 2048u);
  CHECK_NOTHROW(c.validate());

  const RunConfig round = RunConfig::from_json(json::parse(c.to_json().dump()));
  CHECK(round.to_json() == c.to_json());

  CHECK(RunConfig::from_json(json::parse(R"({"n": 256})")).n == std::vector<std::size_t>{256});
  CHECK(RunConfig::from_json(json::parse(R"({"m": 1e4})")).m == 10000u);
}

TEST_CASE("run config rejects bad input") {
  auto parse = [](const char* s) { return RunConfig::from_json(json::parse(s)); };
  CHECK_THROWS_AS(parse(R"({"bogus": 1})"), std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"q": "two"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"m": 2.5})"), std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"m": -3})"), std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"normalization": "hermite"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"decompose": 1})"), std::invalid_argument);
  CHECK_THROWS_AS(parse("[1, 2]"), std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"q": 7})").validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"H": 1.0})").validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"n": [0]})").validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"n": 2000000})").validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"m": 0})").validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"weight": "tan:1"})").validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"n_fine": 100})").validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"tolerances": {"x": -1}})").validate(), std::invalid_argument);
}

TEST_CASE("csv table formatting") {
  CsvTable t;
  t.header = {"a", "b"};
  t.rows = {{1.0, 0.1}, {-2.5, 1e-20}};
  CHECK(t.to_string() == "a,b\n1,0.1\n-2.5,1e-20\n");
  std::istringstream in(t.to_string());
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  CHECK(std::stod(line.substr(line.find(',') + 1)) == 0.1);
}

TEST_CASE("check list verdicts") {
  CheckList c;
  c.add("ok", 0.5, 1.0);
  CHECK(c.pass());
  c.add("nan", std::nan(""), 1.0);
  CHECK_FALSE(c.pass());
  CHECK(c.json().size() == 2);
  CHECK(c.json()[1]["verdict"] == "fail");
}

TEST_CASE("constants suite") {
  RunConfig c;
  c.subcommand = "constants";
  c.q = 2;
  c.hurst = 0.5;
  const SuiteResult r = run_suite(c);
  CHECK(r.pass);
  CHECK(r.report["results"]["sigma_sq"].get<double>() == Approx(2.0).epsilon(1e-12));
  CHECK(r.report["results"]["regime"]["regime"] == "mixed_clt");
  c.subcommand = "unknown";
  CHECK_THROWS_AS(run_suite(c), std::invalid_argument);
}

TEST_CASE("variation suite with decomposition") {
  RunConfig c;
  c.subcommand = "variation";
  c.q = 3;
  c.hurst = 0.3;
  c.n = {32, 64};
  c.m = 20;
  c.decompose = true;
  const SuiteResult r = run_suite(c);
  CHECK(r.pass);
  REQUIRE(r.samples.rows.size() == 40);
  const auto& h = r.samples.header;
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(h.begin(), h.end(), name) - h.begin());
  };
  for (const auto& row : r.samples.rows) {
    double parts = row[col("main")] + row[col("remainder")];
    for (int k = 1; k < 3; ++k) parts += row[col("middle_" + std::to_string(k))];
    CHECK(std::abs(row[col("g_n")] - parts) <= 1e-8);
  }
  const SuiteResult again = run_suite(c);
  CHECK(again.report.dump() == r.report.dump());
}
