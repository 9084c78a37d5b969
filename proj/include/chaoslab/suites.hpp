#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chaoslab/fbm.hpp"
#include "chaoslab/hermite.hpp"
#include "json.hpp"

namespace chaoslab {

/// Effective configuration of one run. Unset optionals take per-suite defaults.
struct RunConfig {
  std::string subcommand;
  std::optional<int> q;
  std::optional<double> hurst;
  std::vector<std::size_t> n;
  std::optional<std::size_t> m;
  std::uint64_t seed = 1;
  std::optional<std::string> weight;
  Normalization normalization = Normalization::monic;
  std::optional<SamplingMethod> method;
  std::map<std::string, double> tolerances;
  std::string out_dir = ".";
  bool decompose = false;
  std::optional<std::size_t> n_fine;

  double tolerance(const std::string& key, double fallback) const;
  nlohmann::ordered_json to_json() const;
  /// Flat keys mirroring the command-line flags; throws std::invalid_argument.
  static RunConfig from_json(const nlohmann::json& j);
  /// Range checks against the module caps; throws std::invalid_argument.
  void validate() const;
};

/// Tabular per-sample output.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  bool empty() const { return rows.empty(); }
  std::string to_string() const;
};

struct SuiteResult {
  nlohmann::ordered_json report;  // suite, config, checks, results, verdict
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  CsvTable samples;
  std::optional<FbmPathBatch> paths;
  bool pass = false;
};

/// Adds a check entry and folds its verdict into the suite verdict.
class CheckList {
 public:
  void add(const std::string& name, double statistic, double threshold,
           nlohmann::ordered_json details = nlohmann::ordered_json::object());
  void add_report(const nlohmann::ordered_json& test_report, bool pass);
  /// Verdict for checks whose pass condition is not statistic <= threshold.
  void add_flag(const std::string& name, bool pass, nlohmann::ordered_json details = nlohmann::ordered_json::object());
  bool pass() const { return pass_; }
  nlohmann::ordered_json json() const { return checks_; }

 private:
  nlohmann::ordered_json checks_ = nlohmann::ordered_json::array();
  bool pass_ = true;
};

SuiteResult run_identities(const RunConfig& config);
SuiteResult run_fbm(const RunConfig& config);
SuiteResult run_fbm_properties(const RunConfig& config);
SuiteResult run_variation(const RunConfig& config);
SuiteResult run_decomposition_suite(const RunConfig& config);
SuiteResult run_limit_test(const RunConfig& config);
SuiteResult run_berry_esseen(const RunConfig& config);
SuiteResult run_example_brownian(const RunConfig& config);
SuiteResult run_constants(const RunConfig& config);

/// Dispatch by config.subcommand.
SuiteResult run_suite(const RunConfig& config);

}  // namespace chaoslab
