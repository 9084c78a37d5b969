#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "chaoslab/parallel.hpp"
#include "chaoslab/suites.hpp"
#include "json.hpp"

#ifndef CHAOSLAB_VERSION
#define CHAOSLAB_VERSION "unknown"
#endif

namespace {

using chaoslab::RunConfig;
using nlohmann::ordered_json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct Flags {
  int q = 0;
  double hurst = 0.0;
  std::vector<std::size_t> n;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  std::string weight;
  std::string normalization;
  std::string method;
  std::string out;
  std::string config;
  bool decompose = false;
  std::size_t n_fine = 0;
};

void add_common_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--q", f.q, "Hermite order");
  sub->add_option("--H", f.hurst, "Hurst index");
  sub->add_option("--n", f.n, "Grid size (comma-separated list allowed)")->delimiter(',');
  sub->add_option("--m", f.m, "Monte Carlo sample size");
  sub->add_option("--seed", f.seed, "Random seed");
  sub->add_option("--weight", f.weight, "poly:c0,c1,..|cos:a,b|expq:c");
  sub->add_option("--normalization", f.normalization, "monic or scaled");
  sub->add_option("--method", f.method, "cholesky or circulant");
  sub->add_option("--out", f.out, "Output directory");
  sub->add_option("--config", f.config, "JSON config with flat keys");
  sub->add_flag("--decompose", f.decompose, "Emit the decomposition components");
  sub->add_option("--n-fine", f.n_fine, "Fine grid for the mixture limit");
}

RunConfig build_config(const CLI::App& sub, const Flags& f) {
  nlohmann::json j = nlohmann::json::object();
  if (sub.count("--config")) {
    std::ifstream in(f.config);
    if (!in) throw std::invalid_argument("cannot open config file '" + f.config + "'");
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  }
  if (sub.count("--q")) j["q"] = f.q;
  if (sub.count("--H")) j["H"] = f.hurst;
  if (sub.count("--n")) j["n"] = f.n;
  if (sub.count("--m")) j["m"] = f.m;
  if (sub.count("--seed")) j["seed"] = f.seed;
  if (sub.count("--weight")) j["weight"] = f.weight;
  if (sub.count("--normalization")) j["normalization"] = f.normalization;
  if (sub.count("--method")) j["method"] = f.method;
  if (sub.count("--out")) j["out"] = f.out;
  if (sub.count("--decompose")) j["decompose"] = f.decompose;
  if (sub.count("--n-fine")) j["n_fine"] = f.n_fine;
  j["subcommand"] = sub.get_name();
  RunConfig c = RunConfig::from_json(j);
  c.validate();
  return c;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void write_outputs(const RunConfig& config, const chaoslab::SuiteResult& result, double runtime) {
  namespace fs = std::filesystem;
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  ordered_json report;
  report["suite"] = result.report.at("suite");
  report["version"] = CHAOSLAB_VERSION;
  for (const auto& [k, v] : result.report.items()) {
    if (k != "suite") report[k] = v;
  }
  ordered_json meta = result.meta;
  meta["timestamp"] = utc_timestamp();
  meta["wall_seconds"] = runtime;
  meta["threads"] = chaoslab::worker_count();
  report["meta"] = meta;
  std::ofstream(dir / "report.json") << report.dump(2) << '\n';
  if (!result.samples.empty()) std::ofstream(dir / "samples.csv") << result.samples.to_string();
  if (result.paths) chaoslab::write_fbm_file(dir / "paths.fbm", *result.paths);
  std::cout << report.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chaos lab: Malliavin calculus identities, fractional Brownian motion and weighted variations"};
  app.set_version_flag("--version", std::string(CHAOSLAB_VERSION));
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"identities", "Gaussian-space identity suite"},
      {"fbm", "fBm sampling, covariance property suite and optional path export"},
      {"variation", "Weighted Hermite variations, corrections and decomposition"},
      {"limit-test", "Comparison of the variation with its limit law"},
      {"berry-esseen", "Fourth-moment bound check on the quadratic variation"},
      {"example-brownian", "Brownian example of the limit theorem"},
      {"constants", "Covariances, sigma and regime map"}};
  for (const auto& [name, help] : commands) add_common_flags(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }
  const CLI::App* sub = app.get_subcommands().front();
  try {
    const auto start = std::chrono::steady_clock::now();
    const RunConfig config = build_config(*sub, flags);
    const chaoslab::SuiteResult result = chaoslab::run_suite(config);
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_outputs(config, result, runtime);
    return result.pass ? kExitPass : kExitFail;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
}
