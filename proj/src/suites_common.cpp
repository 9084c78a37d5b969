#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "chaoslab/suites.hpp"
#include "chaoslab/variations.hpp"

namespace chaoslab {

using nlohmann::json;
using nlohmann::ordered_json;

double RunConfig::tolerance(const std::string& key, double fallback) const {
  const auto it = tolerances.find(key);
  return it == tolerances.end() ? fallback : it->second;
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["subcommand"] = subcommand;
  j["q"] = q ? json(*q) : json(nullptr);
  j["H"] = hurst ? json(*hurst) : json(nullptr);
  j["n"] = n;
  j["m"] = m ? json(*m) : json(nullptr);
  j["seed"] = seed;
  j["weight"] = weight ? json(*weight) : json(nullptr);
  j["normalization"] = normalization == Normalization::monic ? "monic" : "scaled";
  j["method"] = method ? json(chaoslab::to_string(*method)) : json(nullptr);
  j["tolerances"] = tolerances;
  j["out"] = out_dir;
  j["decompose"] = decompose;
  j["n_fine"] = n_fine ? json(*n_fine) : json(nullptr);
  return j;
}

namespace {

template <class T>
T require_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw std::invalid_argument("config key '" + key + "' must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d != std::floor(d)) throw std::invalid_argument("config key '" + key + "' must be an integer");
      if (d < 0) throw std::invalid_argument("config key '" + key + "' must be non-negative");
      return static_cast<T>(d);
    }
    if (v.is_number_integer() && v.get<long long>() < 0 && std::is_unsigned_v<T>)
      throw std::invalid_argument("config key '" + key + "' must be non-negative");
  }
  return v.get<T>();
}

std::string require_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw std::invalid_argument("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  RunConfig c;
  for (const auto& [key, v] : j.items()) {
    if (v.is_null()) continue;
    if (key == "subcommand") {
      c.subcommand = require_string(v, key);
    } else if (key == "q") {
      c.q = require_number<int>(v, key);
    } else if (key == "H") {
      c.hurst = require_number<double>(v, key);
    } else if (key == "n") {
      if (v.is_array()) {
        for (const auto& e : v) c.n.push_back(require_number<std::size_t>(e, key));
      } else {
        c.n = {require_number<std::size_t>(v, key)};
      }
    } else if (key == "m") {
      c.m = require_number<std::size_t>(v, key);
    } else if (key == "seed") {
      c.seed = require_number<std::uint64_t>(v, key);
    } else if (key == "weight") {
      c.weight = require_string(v, key);
    } else if (key == "normalization") {
      const std::string s = require_string(v, key);
      if (s == "monic") {
        c.normalization = Normalization::monic;
      } else if (s == "scaled") {
        c.normalization = Normalization::scaled;
      } else {
        throw std::invalid_argument("normalization must be 'monic' or 'scaled'");
      }
    } else if (key == "method") {
      c.method = parse_sampling_method(require_string(v, key));
    } else if (key == "tolerances") {
      if (!v.is_object()) throw std::invalid_argument("config key 'tolerances' must be an object");
      for (const auto& [tk, tv] : v.items()) c.tolerances[tk] = require_number<double>(tv, "tolerances." + tk);
    } else if (key == "out") {
      c.out_dir = require_string(v, key);
    } else if (key == "decompose") {
      if (!v.is_boolean()) throw std::invalid_argument("config key 'decompose' must be a boolean");
      c.decompose = v.get<bool>();
    } else if (key == "n_fine") {
      c.n_fine = require_number<std::size_t>(v, key);
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  return c;
}

void RunConfig::validate() const {
  if (q && (*q < 1 || *q > 6)) throw std::invalid_argument("q must lie in [1, 6]");
  if (hurst && !(*hurst > 0.0 && *hurst < 1.0)) throw std::invalid_argument("H must lie in (0, 1)");
  for (std::size_t v : n) {
    if (v < 1 || v > (std::size_t{1} << 20)) throw std::invalid_argument("n must lie in [1, 2^20]");
  }
  if (m && (*m < 1 || *m > 100000000)) throw std::invalid_argument("m must lie in [1, 1e8]");
  if (weight) WeightFunction::parse(*weight);
  if (n_fine && *n_fine < 1024) throw std::invalid_argument("n_fine must be at least 1024");
  for (const auto& [k, v] : tolerances) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("tolerance '" + k + "' must be positive");
  }
}

std::string CsvTable::to_string() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  char buf[64];
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), row[i]);
      if (i) out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  return out.str();
}

void CheckList::add(const std::string& name, double statistic, double threshold, ordered_json details) {
  const bool ok = std::isfinite(statistic) && statistic <= threshold;
  ordered_json c;
  c["name"] = name;
  c["statistic"] = statistic;
  c["threshold"] = threshold;
  c["verdict"] = ok ? "pass" : "fail";
  if (!details.empty()) c["details"] = std::move(details);
  checks_.push_back(std::move(c));
  pass_ = pass_ && ok;
}

void CheckList::add_report(const ordered_json& test_report, bool pass) {
  checks_.push_back(test_report);
  pass_ = pass_ && pass;
}

void CheckList::add_flag(const std::string& name, bool pass, ordered_json details) {
  ordered_json c;
  c["name"] = name;
  c["verdict"] = pass ? "pass" : "fail";
  if (!details.empty()) c["details"] = std::move(details);
  checks_.push_back(std::move(c));
  pass_ = pass_ && pass;
}

SuiteResult run_suite(const RunConfig& config) {
  const std::string& s = config.subcommand;
  if (s == "identities") return run_identities(config);
  if (s == "fbm") return run_fbm(config);
  if (s == "variation") return run_variation(config);
  if (s == "limit-test") return run_limit_test(config);
  if (s == "berry-esseen") return run_berry_esseen(config);
  if (s == "example-brownian") return run_example_brownian(config);
  if (s == "constants") return run_constants(config);
  throw std::invalid_argument("unknown subcommand '" + s + "'");
}

}  // namespace chaoslab
