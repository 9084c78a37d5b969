// Acceptance driver: `acceptance <id>` runs one criterion and prints a
// pass/fail line per check followed by the criterion verdict.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>

#include "chaoslab/parallel.hpp"
#include "chaoslab/suites.hpp"

using namespace chaoslab;

namespace {

struct Criterion {
  std::string title;
  double time_limit;                 // seconds
  std::function<RunConfig()> config;
  std::set<std::string> required;    // empty: every check is required
};

RunConfig make(const std::string& sub) {
  RunConfig c;
  c.subcommand = sub;
  return c;
}

RunConfig limit_test(double h) {
  RunConfig c = make("limit-test");
  c.q = 2;
  c.hurst = h;
  c.weight = "cos:1,1";
  c.n = {4096};
  c.m = 10000;
  c.n_fine = 4096;
  return c;
}

RunConfig brownian() {
  RunConfig c = make("example-brownian");
  c.n = {512};
  c.m = 100000;
  return c;
}

Criterion criterion(int id) {
  switch (id) {
    case 1:
      return {"exact identity suite", 60.0, [] {
                RunConfig c = make("identities");
                c.m = 200;
                return c;
              }, {}};
    case 2: return {"fBm property suite", 60.0, [] { return make("fbm"); }, {}};
    case 3: return {"decomposition identity", 120.0, [] { return make("variation"); }, {}};
    case 4: return {"mixed CLT Monte Carlo", 600.0, [] { return limit_test(0.3); }, {}};
    case 5:
      return {"critical case H=1/4", 600.0, [] { return limit_test(0.25); },
              {"ks_two_sample", "conditional_cf_test"}};
    case 6:
      return {"lower regime L2 convergence", 300.0, [] {
                RunConfig c = make("limit-test");
                c.q = 2;
                c.hurst = 0.1;
                c.weight = "poly:0,0,0,0,1";
                c.n = {256, 1024, 4096};
                c.m = 2000;
                return c;
              }, {}};
    case 7:
      return {"Berry-Esseen bounds", 300.0, [] {
                RunConfig c = make("berry-esseen");
                c.m = 1000000;
                return c;
              }, {}};
    case 8:
      return {"Brownian example", 120.0, brownian, {"mean_u_dot_df", "mean_f_sq", "ks_two_sample"}};
    default: throw std::invalid_argument("unknown criterion");
  }
}

struct Outcome {
  bool pass = true;
  std::string report;
};

Outcome run(int id) {
  const Criterion c = criterion(id);
  const auto start = std::chrono::steady_clock::now();
  const SuiteResult r = run_suite(c.config());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Outcome out;
  out.report = r.report.dump();
  for (const auto& check : r.report["checks"]) {
    const std::string name = check.value("name", "");
    const bool ok = check.value("verdict", "") == "pass";
    const bool counted = c.required.empty() || c.required.count(name) > 0;
    std::printf("  %s %s: %s", counted ? "check" : "extra", name.c_str(), ok ? "pass" : "fail");
    if (check.contains("statistic")) std::printf(" (statistic %.6g", check["statistic"].get<double>());
    if (check.contains("threshold")) std::printf(", threshold %.6g)", check["threshold"].get<double>());
    else if (check.contains("statistic")) std::printf(")");
    std::printf("\n");
    if (counted) out.pass = out.pass && ok;
  }
  const bool in_time = secs < c.time_limit;
  std::printf("  runtime %.2f s (limit %.0f s): %s\n", secs, c.time_limit, in_time ? "pass" : "fail");
  out.pass = out.pass && in_time;
  std::printf("criterion %d (%s): %s\n", id, c.title.c_str(), out.pass ? "PASS" : "FAIL");
  return out;
}

bool determinism() {
  bool all = true;
  for (int id : {4, 8}) {
    set_worker_count(0);
    const std::string first = run_suite(criterion(id).config()).report.dump();
    set_worker_count(3);
    const std::string second = run_suite(criterion(id).config()).report.dump();
    set_worker_count(0);
    const bool same = first == second;
    std::printf("  check rerun_of_criterion_%d_identical: %s (%zu bytes)\n", id, same ? "pass" : "fail", first.size());
    all = all && same;
  }
  std::printf("criterion 9 (determinism): %s\n", all ? "PASS" : "FAIL");
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: acceptance <criterion 1-9>\n");
    return 2;
  }
  const int id = std::atoi(argv[1]);
  try {
    if (id == 9) return determinism() ? 0 : 1;
    if (id < 1 || id > 8) {
      std::fprintf(stderr, "criterion must lie in 1..9\n");
      return 2;
    }
    return run(id).pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::printf("criterion %d: FAIL (%s)\n", id, e.what());
    return 1;
  }
}
