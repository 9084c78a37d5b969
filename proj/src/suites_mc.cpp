#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "chaoslab/fbm.hpp"
#include "chaoslab/limit_laws.hpp"
#include "chaoslab/parallel.hpp"
#include "chaoslab/suites.hpp"
#include "chaoslab/variations.hpp"

namespace chaoslab {

using nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

SuiteResult finish(const std::string& name, const RunConfig& echo, const CheckList& checks, ordered_json results,
                   Clock::time_point start) {
  SuiteResult out;
  out.report["suite"] = name;
  out.report["config"] = echo.to_json();
  out.report["checks"] = checks.json();
  out.report["results"] = std::move(results);
  out.report["verdict"] = checks.pass() ? "pass" : "fail";
  out.pass = checks.pass();
  out.meta["runtime_seconds"] = seconds_since(start);
  return out;
}

ordered_json moments_json(const Moments& m) {
  return {{"mean", m.mean}, {"variance", m.variance}, {"std_error", m.std_error}, {"count", m.count}};
}

ordered_json regime_json(const RegimeSpec& r) {
  return {{"regime", to_string(r.regime)},
          {"lower_threshold", r.lower_threshold},
          {"upper_threshold", r.upper_threshold},
          {"scaling", r.scaling},
          {"limit", r.limit}};
}

double mean_of(const std::vector<double>& v) { return sample_moments(v).mean; }

}  // namespace

SuiteResult run_fbm(const RunConfig& config) {
  const auto start = Clock::now();
  RunConfig props = config;
  props.hurst.reset();
  props.m.reset();
  SuiteResult base = run_fbm_properties(props);
  CheckList checks;
  for (const auto& c : base.report["checks"]) checks.add_report(c, c["verdict"] == "pass");

  RunConfig echo = config;
  ordered_json results = ordered_json::object();
  std::optional<FbmPathBatch> batch;
  CsvTable samples;
  if (!config.n.empty()) {
    const double h = config.hurst.value_or(0.3);
    const std::size_t n = config.n.front();
    const std::size_t m = config.m.value_or(1000);
    echo.hurst = h;
    echo.m = m;
    batch = sample_paths(FbmGrid{h, n}, m, config.seed, config.method);
    std::vector<double> end_sq(m), lag1(m);
    const double scale = std::pow(static_cast<double>(n), 2.0 * h);
    samples.header = {"path", "B_1", "sum_sq_increments"};
    for (std::size_t i = 0; i < m; ++i) {
      const auto lv = batch->path_levels(i);
      const auto inc = batch->path_increments(i);
      end_sq[i] = lv[n] * lv[n];
      lag1[i] = n > 1 ? scale * inc[0] * inc[1] : 0.0;
      double ss = 0.0;
      for (double d : inc) ss += d * d;
      samples.rows.push_back({static_cast<double>(i), lv[n], ss});
    }
    const Moments e = sample_moments(end_sq);
    const double z_end = std::abs(e.mean - 1.0) / e.std_error;
    checks.add("terminal_variance", z_end, config.tolerance("z_score", 4.0), {{"mean_B1_sq", e.mean}, {"std_error", e.std_error}});
    if (n > 1) {
      const Moments l = sample_moments(lag1);
      const double z_lag = std::abs(l.mean - rho(h, 1)) / l.std_error;
      checks.add("lag_one_covariance", z_lag, config.tolerance("z_score", 4.0),
                 {{"mean", l.mean}, {"expected", rho(h, 1)}, {"std_error", l.std_error}});
    }
    results["method"] = to_string(FbmSampler(FbmGrid{h, n}, config.method).method());
  }
  SuiteResult out = finish("fbm", echo, checks, results, start);
  out.samples = std::move(samples);
  out.paths = std::move(batch);
  out.meta["properties"] = base.meta;
  return out;
}

SuiteResult run_variation(const RunConfig& config) {
  if (config.n.empty()) return run_decomposition_suite(config);
  const auto start = Clock::now();
  const int q = config.q.value_or(2);
  const double h = config.hurst.value_or(0.3);
  const std::size_t m = config.m.value_or(1000);
  const std::string wspec = config.weight.value_or("cos:1,1");
  const WeightFunction f = WeightFunction::parse(wspec);
  RunConfig echo = config;
  echo.q = q;
  echo.hurst = h;
  echo.m = m;
  echo.weight = wspec;

  CheckList checks;
  ordered_json results = ordered_json::array();
  CsvTable samples;
  samples.header = {"n", "path", "g_n", "correction", "renormalized"};
  if (config.decompose) {
    samples.header.push_back("main");
    for (int r = 1; r < q; ++r) samples.header.push_back("middle_" + std::to_string(r));
    samples.header.push_back("remainder");
    samples.header.push_back("residual");
  }
  double worst_residual = 0.0;
  for (std::size_t n : config.n) {
    const FbmSampler sampler(FbmGrid{h, n}, config.method);
    const VariationEvaluator ev(sampler.grid(), q, f, config.normalization);
    std::vector<PathVariation> paths(m);
    std::vector<double> fsq(m), an(m);
    const bool with_an = q >= 2 && ev.regime().regime == Regime::mixed_clt;
    std::optional<AnStatistic> an_stat;
    if (with_an) an_stat.emplace(sampler.grid(), q);
    sampler.for_each_path(config.seed, m, [&](std::size_t i, std::span<const double> lv, std::span<const double> inc) {
      paths[i] = ev.evaluate(lv, inc, config.decompose);
      std::vector<double> w(n);
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        w[k] = f(lv[k]);
        acc += w[k] * w[k];
      }
      fsq[i] = acc / static_cast<double>(n);
      if (with_an) an[i] = (*an_stat)(w);
    });
    std::vector<double> g(m), ren(m);
    for (std::size_t i = 0; i < m; ++i) {
      const PathVariation& p = paths[i];
      g[i] = p.g_n;
      ren[i] = p.renormalized;
      std::vector<double> row = {static_cast<double>(n), static_cast<double>(i), p.g_n, p.correction, p.renormalized};
      if (config.decompose) {
        row.push_back(p.main);
        row.insert(row.end(), p.middle.begin(), p.middle.end());
        row.push_back(p.remainder);
        row.push_back(p.residual);
        worst_residual = std::max(worst_residual, std::abs(p.residual));
      }
      samples.rows.push_back(std::move(row));
    }
    ordered_json cell = {{"n", n},
                         {"method", to_string(sampler.method())},
                         {"regime", q >= 2 ? regime_json(ev.regime()) : ordered_json(nullptr)},
                         {"g_n", moments_json(sample_moments(g))},
                         {"renormalized", moments_json(sample_moments(ren))}};
    if (with_an) {
      try {
        const double s2 = sigma_hq(h, q).sigma_sq;
        const double qf = config.normalization == Normalization::scaled ? factorial(q) : 1.0;
        cell["predicted_variance"] = s2 * mean_of(fsq) / (qf * qf);
        cell["mean_a_n"] = mean_of(an) / (qf * qf);
      } catch (const std::domain_error&) {
      }
    }
    results.push_back(std::move(cell));
  }
  if (config.decompose) checks.add("decomposition_residual", worst_residual, config.tolerance("decomposition", 1e-8));
  SuiteResult out = finish("variation", echo, checks, {{"cells", results}}, start);
  out.samples = std::move(samples);
  return out;
}

namespace {

struct LimitPaths {
  std::vector<double> corrected;    // G_n minus the correction
  std::vector<double> uncorrected;  // G_n
  std::vector<double> scaled_corrected;
  std::vector<double> s2;           // sigma^2 (1/n) sum f(B)^2
  std::vector<double> drift;        // correction term on the path
};

LimitPaths collect_limit_paths(const FbmSampler& sampler, std::uint64_t seed, std::size_t m, int q,
                               const WeightFunction& f, Normalization norm, double sigma_sq) {
  const std::size_t n = sampler.grid().n;
  const VariationEvaluator ev(sampler.grid(), q, f, norm);
  const VariationEvaluator ev_scaled(sampler.grid(), q, f, Normalization::scaled);
  LimitPaths p;
  p.corrected.resize(m);
  p.uncorrected.resize(m);
  p.scaled_corrected.resize(m);
  p.s2.resize(m);
  p.drift.resize(m);
  sampler.for_each_path(seed, m, [&](std::size_t i, std::span<const double> lv, std::span<const double> inc) {
    const double g = ev.g_n(lv, inc);
    const double c = ev.correction(lv);
    p.uncorrected[i] = g;
    p.corrected[i] = g - c;
    p.drift[i] = c;
    p.scaled_corrected[i] = ev_scaled.g_n(lv, inc) - ev_scaled.correction(lv);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = f(lv[k]);
      acc += v * v;
    }
    p.s2[i] = sigma_sq * acc / static_cast<double>(n);
  });
  return p;
}

SuiteResult mixture_suite(const RunConfig& config, RunConfig echo, int q, double h, const WeightFunction& f,
                          bool critical, Clock::time_point start) {
  const std::size_t n = echo.n.front();
  const std::size_t m = *echo.m;
  const std::size_t n_fine = *echo.n_fine;
  const SigmaResult sig = sigma_hq(h, q);
  const double qf = factorial(q);
  const bool scaled = config.normalization == Normalization::scaled;
  const double sigma = scaled ? sig.sigma / qf : sig.sigma;
  const double sigma_sq = sigma * sigma;
  const FbmSampler sampler(FbmGrid{h, n}, config.method);
  const LimitPaths paths = collect_limit_paths(sampler, config.seed, m, q, f, config.normalization, sigma_sq);

  MixtureSpec spec;
  spec.q = q;
  spec.hurst = h;
  spec.f = f;
  spec.n_fine = n_fine;
  spec.sigma = sigma;
  spec.with_drift = critical;
  spec.normalization = config.normalization;
  spec.method = config.method;
  const MixtureSample mix = sample_mixture_limit(spec, m, config.seed);
  const std::vector<double>& stat = critical ? paths.uncorrected : paths.corrected;

  CheckList checks;
  const double var_tol = config.tolerance("variance_rel", 0.05);
  const double alpha = config.tolerance("ks_alpha", 0.01);
  const double cf_thr = config.tolerance("cf_threshold", 4.0);
  const Moments sm = sample_moments(stat);
  const double target = mean_of(paths.s2);
  ordered_json results = {{"sigma_sq", sig.sigma_sq},
                          {"sigma_sq_normalized", sigma_sq},
                          {"method", to_string(sampler.method())},
                          {"statistic", critical ? "G_n" : "G_n - correction"},
                          {"statistic_moments", moments_json(sm)},
                          {"target_variance", target},
                          {"mixture_target_variance", mean_of(mix.conditional_variances)}};
  if (critical) results["mean_drift"] = mean_of(mix.drift);

  if (!critical) {
    const double ratio = sm.variance / target;
    checks.add("variance_ratio", std::abs(ratio - 1.0), var_tol, {{"ratio", ratio}});
  }
  TestReport ks = ks_two_sample(stat, mix.values, alpha);
  checks.add_report(ks.to_json(false), ks.pass);
  TestReport cf = conditional_cf_test(stat, paths.s2, {}, critical ? std::span<const double>(paths.drift)
                                                                    : std::span<const double>(),
                                      cf_thr);
  checks.add_report(cf.to_json(false), cf.pass);

  if (!critical && !scaled && q >= 2) {
    // Scaled statistic against monic constants: the variance must be off by about (q!)^2.
    const double ratio = sample_moments(paths.scaled_corrected).variance / target;
    const bool detected = std::abs(ratio - 1.0) > var_tol;
    const double rescaled = ratio * qf * qf;
    checks.add_flag("scaled_vs_monic_mismatch_detected", detected && std::abs(rescaled - 1.0) <= var_tol,
                    {{"variance_ratio", ratio}, {"ratio_times_qfact_sq", rescaled}, {"expected_ratio", 1.0 / (qf * qf)}});
  }

  SuiteResult out = finish(critical ? "limit_critical" : "limit_mixture", echo, checks, results, start);
  out.samples.header = {"path", "statistic", "conditional_variance", "drift", "mixture_value"};
  for (std::size_t i = 0; i < m; ++i) {
    out.samples.rows.push_back({static_cast<double>(i), stat[i], paths.s2[i], critical ? paths.drift[i] : 0.0, mix.values[i]});
  }
  out.meta["ks_runtime_seconds"] = ks.runtime_seconds;
  out.meta["cf_runtime_seconds"] = cf.runtime_seconds;
  return out;
}

SuiteResult lower_suite(const RunConfig& config, RunConfig echo, int q, double h, const WeightFunction& f,
                        Clock::time_point start) {
  const std::size_t m = *echo.m;
  CheckList checks;
  std::vector<double> distances;
  ordered_json cells = ordered_json::array();
  CsvTable samples;
  samples.header = {"n", "path", "scaled_statistic", "riemann_term"};
  for (std::size_t n : echo.n) {
    const FbmSampler sampler(FbmGrid{h, n}, config.method);
    const VariationEvaluator ev(sampler.grid(), q, f, config.normalization);
    const double scale = ev.regime().renormalization(n);
    std::vector<double> x(m), riemann(m);
    sampler.for_each_path(config.seed, m, [&](std::size_t i, std::span<const double> lv, std::span<const double> inc) {
      x[i] = scale * ev.g_n(lv, inc);
      riemann[i] = scale * ev.correction(lv);
    });
    std::vector<double> diff_sq(m), ref_sq(m);
    for (std::size_t i = 0; i < m; ++i) {
      diff_sq[i] = (x[i] - riemann[i]) * (x[i] - riemann[i]);
      ref_sq[i] = riemann[i] * riemann[i];
      samples.rows.push_back({static_cast<double>(n), static_cast<double>(i), x[i], riemann[i]});
    }
    const double dist = std::sqrt(pairwise_sum(diff_sq) / pairwise_sum(ref_sq));
    distances.push_back(dist);
    cells.push_back({{"n", n}, {"method", to_string(sampler.method())}, {"relative_l2_distance", dist}});
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < distances.size(); ++i) decreasing = decreasing && distances[i] < distances[i - 1];
  checks.add_flag("distance_decreasing", decreasing, {{"distances", distances}});
  checks.add("final_relative_l2_distance", distances.back(), config.tolerance("l2_rel", 0.10));
  SuiteResult out = finish("limit_lower", echo, checks, {{"cells", cells}}, start);
  out.samples = std::move(samples);
  return out;
}

}  // namespace

SuiteResult run_limit_test(const RunConfig& config) {
  const auto start = Clock::now();
  const int q = config.q.value_or(2);
  const double h = config.hurst.value_or(0.3);
  if (q < 2) throw std::invalid_argument("limit-test: q must be at least 2");
  const RegimeSpec regime = classify_regime(q, h);
  RunConfig echo = config;
  echo.q = q;
  echo.hurst = h;
  switch (regime.regime) {
    case Regime::mixed_clt:
    case Regime::critical_lower: {
      echo.weight = config.weight.value_or("cos:1,1");
      echo.n = config.n.empty() ? std::vector<std::size_t>{4096} : std::vector<std::size_t>{config.n.front()};
      echo.m = config.m.value_or(10000);
      echo.n_fine = config.n_fine.value_or(4096);
      return mixture_suite(config, echo, q, h, WeightFunction::parse(*echo.weight),
                           regime.regime == Regime::critical_lower, start);
    }
    case Regime::lower: {
      echo.weight = config.weight.value_or("poly:0,0,0,0,1");
      echo.n = config.n.empty() ? std::vector<std::size_t>{256, 1024, 4096} : config.n;
      echo.m = config.m.value_or(2000);
      return lower_suite(config, echo, q, h, WeightFunction::parse(*echo.weight), start);
    }
    default:
      throw std::invalid_argument("limit-test: no mixture or Riemann limit in the " + to_string(regime.regime) +
                                  " regime");
  }
}

SuiteResult run_berry_esseen(const RunConfig& config) {
  const auto start = Clock::now();
  const std::vector<double> hs = config.hurst ? std::vector<double>{*config.hurst} : std::vector<double>{0.4, 0.5, 0.6};
  const std::vector<std::size_t> ns = config.n.empty() ? std::vector<std::size_t>{64, 256} : config.n;
  const std::size_t m = config.m.value_or(1000000);
  RunConfig echo = config;
  echo.n = ns;
  echo.m = m;
  CheckList checks;
  const FourthMoment ref = chaos2_fourth_moment_exact(0.5, 4);
  checks.add("exact_fourth_moment_reference", std::abs(ref.normalized_m4 - 6.0), config.tolerance("exact_m4", 1e-10),
             {{"H", 0.5}, {"n", 4}, {"fourth_moment", ref.normalized_m4}});
  ordered_json cells = ordered_json::array();
  double runtime = 0.0;
  for (double h : hs) {
    for (std::size_t n : ns) {
      const TestReport r = berry_esseen_check(h, n, m, config.seed, config.method);
      runtime += r.runtime_seconds;
      checks.add_report(r.to_json(false), r.pass);
    }
  }
  SuiteResult out = finish("berry_esseen", echo, checks, ordered_json::object(), start);
  out.meta["mc_runtime_seconds"] = runtime;
  return out;
}

SuiteResult run_example_brownian(const RunConfig& config) {
  const auto start = Clock::now();
  BrownianExampleConfig bc;
  bc.n = config.n.empty() ? 512 : config.n.front();
  bc.m = config.m.value_or(100000);
  bc.seed = config.seed;
  if (config.n_fine) bc.fine_steps = *config.n_fine;
  RunConfig echo = config;
  echo.n = {bc.n};
  echo.m = bc.m;
  echo.n_fine = bc.fine_steps;

  const BrownianSample s = sample_brownian_example(bc);
  std::vector<double> f2(bc.m), s2(bc.m);
  const std::vector<double> limit = brownian_limit_sample(bc.m, bc.seed);
  for (std::size_t i = 0; i < bc.m; ++i) {
    f2[i] = s.f_n[i] * s.f_n[i];
    s2[i] = 0.5 * s.w1[i] * s.w1[i];
  }
  const Moments ud = sample_moments(s.u_dot_df);
  const Moments fm = sample_moments(f2);
  CheckList checks;
  const double k = config.tolerance("z_score", 3.0);
  checks.add("mean_u_dot_df", std::abs(ud.mean - 0.5) / ud.std_error, k, {{"mean", ud.mean}, {"std_error", ud.std_error}});
  checks.add("mean_f_sq", std::abs(fm.mean - 0.5) / fm.std_error, k,
             {{"mean", fm.mean}, {"std_error", fm.std_error}, {"exact_finite_n", bc.n / (2.0 * bc.n + 2.0)}});
  const TestReport ks = ks_two_sample(s.f_n, limit, config.tolerance("ks_alpha", 0.01));
  checks.add_report(ks.to_json(false), ks.pass);
  const TestReport cf = conditional_cf_test(s.f_n, s2, {}, {}, config.tolerance("cf_threshold", 4.0));
  checks.add_report(cf.to_json(false), cf.pass);
  const double nn = static_cast<double>(bc.n);
  ordered_json results = {{"condition_a", brownian_condition_a(bc.n)},
                          {"f_n_moments", moments_json(sample_moments(s.f_n))},
                          {"exact_third_moment", 6.0 * std::pow(nn, 1.5) / ((nn + 2.0) * (3.0 * nn + 3.0))},
                          {"limit_third_moment", 0.0}};
  SuiteResult out = finish("example_brownian", echo, checks, results, start);
  out.samples.header = {"path", "f_n", "u_dot_df", "w1"};
  for (std::size_t i = 0; i < bc.m; ++i) out.samples.rows.push_back({static_cast<double>(i), s.f_n[i], s.u_dot_df[i], s.w1[i]});
  return out;
}

}  // namespace chaoslab
