#include "chaoslab/limit_laws.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "chaoslab/parallel.hpp"
#include "chaoslab/rng.hpp"

namespace chaoslab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double json_number(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::quiet_NaN(); }

constexpr double kDefaultLambdas[] = {0.5, 1.0, 2.0};

}  // namespace

nlohmann::ordered_json TestReport::to_json(bool include_meta) const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["sample_sizes"] = sample_sizes;
  j["statistic"] = json_number(statistic);
  j["threshold"] = json_number(threshold);
  j["verdict"] = pass ? "pass" : "fail";
  j["seeds"] = seeds;
  j["details"] = details;
  if (include_meta) j["meta"] = {{"runtime_seconds", runtime_seconds}};
  return j;
}

MixtureSample sample_mixture_limit(const MixtureSpec& spec, std::size_t m, std::uint64_t seed) {
  if (spec.n_fine < 1024) throw std::invalid_argument("mixture: n_fine must be at least 1024");
  if (!(spec.sigma >= 0.0)) throw std::invalid_argument("mixture: sigma must be non-negative");
  MixtureSample out;
  out.values.assign(m, 0.0);
  out.conditional_variances.assign(m, 0.0);
  out.drift.assign(m, 0.0);
  if (m == 0) return out;
  const FbmSampler sampler(FbmGrid{spec.hurst, spec.n_fine}, spec.method);
  const double cq = correction_constant(spec.q, spec.normalization);
  const double inv_n = 1.0 / static_cast<double>(spec.n_fine);
  const std::uint64_t path_seed = stream_key(seed, 0, StreamTag::mixture);
  sampler.for_each_path(path_seed, m, [&](std::size_t i, std::span<const double> levels, std::span<const double>) {
    double sq = 0.0, dq = 0.0;
    for (std::size_t k = 0; k < spec.n_fine; ++k) {
      const double v = spec.f(levels[k]);
      sq += v * v;
      if (spec.with_drift) dq += spec.f.derivative(spec.q, levels[k]);
    }
    const double s2 = spec.sigma * spec.sigma * sq * inv_n;
    const double drift = spec.with_drift ? cq * dq * inv_n : 0.0;
    NormalStream z(seed, i, StreamTag::mixture);
    out.conditional_variances[i] = s2;
    out.drift[i] = drift;
    out.values[i] = drift + std::sqrt(s2) * z();
  });
  return out;
}

std::vector<double> conditional_mixture_draws(double s2, double drift, std::size_t m, std::uint64_t seed) {
  if (!(s2 >= 0.0)) throw std::invalid_argument("mixture: conditional variance must be non-negative");
  std::vector<double> out(m);
  const double s = std::sqrt(s2);
  const std::size_t block = 4096;
  parallel_for((m + block - 1) / block, [&](std::size_t b) {
    NormalStream z(seed, b, StreamTag::mixture);
    for (std::size_t i = b * block; i < std::min(m, (b + 1) * block); ++i) out[i] = drift + s * z();
  });
  return out;
}

double kolmogorov_tail(double x) {
  if (x < 0.05) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double kolmogorov_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("kolmogorov: alpha must lie in (0, 1)");
  double lo = 0.05, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (kolmogorov_tail(mid) > alpha) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

TestReport ks_two_sample(std::span<const double> a, std::span<const double> b, double alpha) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks: empty sample");
  const auto start = Clock::now();
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::stable_sort(x.begin(), x.end());
  std::stable_sort(y.begin(), y.end());
  const double n1 = static_cast<double>(x.size()), n2 = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }
  const double ne = n1 * n2 / (n1 + n2);
  const double scale = std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne);
  TestReport r;
  r.name = "ks_two_sample";
  r.sample_sizes = {x.size(), y.size()};
  r.statistic = d;
  r.threshold = kolmogorov_quantile(alpha) / scale;
  r.details["p_value"] = kolmogorov_tail(scale * d);
  r.details["alpha"] = alpha;
  r.set_verdict();
  r.runtime_seconds = seconds_since(start);
  return r;
}

TestReport conditional_cf_test(std::span<const double> values, std::span<const double> s2,
                               std::span<const double> lambdas, std::span<const double> drift, double threshold) {
  if (values.size() != s2.size()) throw std::invalid_argument("cf test: length mismatch");
  if (!drift.empty() && drift.size() != values.size()) throw std::invalid_argument("cf test: length mismatch");
  if (values.empty()) throw std::invalid_argument("cf test: empty sample");
  if (lambdas.empty()) lambdas = kDefaultLambdas;
  const auto start = Clock::now();
  const std::size_t m = values.size();
  const char* names[] = {"1", "S2", "min(S2,1)", "exp(-S2)"};
  auto functional = [&](int g, double w) {
    switch (g) {
      case 0: return 1.0;
      case 1: return w;
      case 2: return std::min(w, 1.0);
      default: return std::exp(-w);
    }
  };
  TestReport r;
  r.name = "conditional_cf_test";
  r.sample_sizes = {m};
  r.threshold = threshold;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  double worst = 0.0, worst_abs = 0.0;
  std::vector<double> re(m), im(m);
  for (double lambda : lambdas) {
    for (int g = 0; g < 4; ++g) {
      for (std::size_t i = 0; i < m; ++i) {
        const double z = functional(g, s2[i]);
        const double mu = drift.empty() ? 0.0 : drift[i];
        const double damp = std::exp(-0.5 * lambda * lambda * s2[i]);
        re[i] = z * (std::cos(lambda * values[i]) - damp * std::cos(lambda * mu));
        im[i] = z * (std::sin(lambda * values[i]) - damp * std::sin(lambda * mu));
      }
      const Moments mr = sample_moments(re), mi = sample_moments(im);
      const double disc = std::hypot(mr.mean, mi.mean);
      const double se = std::sqrt(mr.std_error * mr.std_error + mi.std_error * mi.std_error);
      double ratio = 0.0;
      if (se > 0.0) ratio = disc / se;
      else if (disc > 0.0) ratio = std::numeric_limits<double>::infinity();
      worst = std::max(worst, ratio);
      worst_abs = std::max(worst_abs, disc);
      cells.push_back({{"lambda", lambda}, {"Z", names[g]}, {"discrepancy", disc}, {"std_error", se},
                       {"ratio", json_number(ratio)}});
    }
  }
  r.statistic = worst;
  r.details["max_abs_discrepancy"] = worst_abs;
  r.details["cells"] = std::move(cells);
  r.set_verdict();
  r.runtime_seconds = seconds_since(start);
  return r;
}

FourthMoment chaos2_fourth_moment_exact(double hurst, std::size_t n) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("fourth moment: Hurst index must lie in (0, 1)");
  if (n < 1 || n > (std::size_t{1} << 16)) throw std::domain_error("fourth moment: n must lie in [1, 2^16]");
  std::vector<double> r(n);
  for (std::size_t k = 0; k < n; ++k) r[k] = rho(hurst, static_cast<long long>(k));
  auto rr = [&](long long k) { return r[static_cast<std::size_t>(k < 0 ? -k : k)]; };
  const auto nn = static_cast<long long>(n);
  // tr(R^2) by lags.
  long double tr2 = 0.0L;
  for (long long k = nn - 1; k >= 1; --k) tr2 += 2.0L * static_cast<long double>(nn - k) * r[k] * r[k];
  tr2 += static_cast<long double>(nn) * r[0] * r[0];
  // tr(R^4) = |R^2|_F^2. R^2 is symmetric and persymmetric; walk each
  // diagonal l - k = d >= 0 starting from row 0.
  std::vector<double> first_row(n);
  for (long long l = 0; l < nn; ++l) {
    long double acc = 0.0L;
    for (long long mm = 0; mm < nn; ++mm) acc += static_cast<long double>(rr(mm)) * rr(mm - l);
    first_row[static_cast<std::size_t>(l)] = static_cast<double>(acc);
  }
  std::vector<long double> diag_sums(n, 0.0L);
  parallel_for(n, [&](std::size_t dd) {
    const long long d = static_cast<long long>(dd);
    long double cur = first_row[dd];
    long double acc = cur * cur;
    for (long long k = 0; k + d + 1 < nn; ++k) {
      const long long l = k + d;
      cur += static_cast<long double>(rr(k + 1)) * rr(-1 - l) - static_cast<long double>(rr(k - nn + 1)) * rr(nn - 1 - l);
      acc += cur * cur;
    }
    diag_sums[dd] = acc;
  });
  long double tr4 = 0.0L;
  for (std::size_t dd = n; dd-- > 0;) tr4 += (dd == 0 ? 1.0L : 2.0L) * diag_sums[dd];
  FourthMoment out;
  const double t2 = static_cast<double>(tr2), t4 = static_cast<double>(tr4);
  const double nd = static_cast<double>(n);
  out.variance = 2.0 * t2 / nd;
  out.fourth_moment = (12.0 * t2 * t2 + 48.0 * t4) / (nd * nd);
  out.normalized_m4 = 3.0 + 12.0 * t4 / (t2 * t2);
  return out;
}

double fourth_moment_bound(int q, double normalized_m4) {
  if (q < 2) throw std::invalid_argument("bound: q must be at least 2");
  return std::sqrt((q - 1.0) / (3.0 * q)) * std::sqrt(std::abs(normalized_m4 - 3.0));
}

TestReport berry_esseen_check(double hurst, std::size_t n, std::size_t m, std::uint64_t seed,
                              std::optional<SamplingMethod> method) {
  if (!(hurst > 0.0 && hurst < 0.75)) throw std::invalid_argument("berry-esseen: H must lie in (0, 3/4)");
  if (m == 0) throw std::invalid_argument("berry-esseen: m must be positive");
  const auto start = Clock::now();
  const FourthMoment fm = chaos2_fourth_moment_exact(hurst, n);
  const double bound = fourth_moment_bound(2, fm.normalized_m4);
  const FbmSampler sampler(FbmGrid{hurst, n}, method);
  const double nh = std::pow(static_cast<double>(n), hurst);
  const double norm = 1.0 / std::sqrt(fm.variance * static_cast<double>(n));
  std::vector<double> f(m);
  sampler.for_each_path(seed, m, [&](std::size_t i, std::span<const double>, std::span<const double> inc) {
    double acc = 0.0;
    for (double d : inc) {
      const double x = nh * d;
      acc += x * x - 1.0;
    }
    f[i] = acc * norm;
  });
  std::sort(f.begin(), f.end());
  const double md = static_cast<double>(m);
  double sup = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double p = normal_cdf(f[i]);
    sup = std::max({sup, static_cast<double>(i + 1) / md - p, p - static_cast<double>(i) / md});
  }
  const double mc_error = 0.5 / std::sqrt(md);
  TestReport r;
  r.name = "berry_esseen";
  r.sample_sizes = {m};
  r.seeds = {seed};
  r.statistic = sup;
  r.threshold = bound + 3.0 * mc_error;
  r.details["hurst"] = hurst;
  r.details["n"] = n;
  r.details["method"] = to_string(sampler.method());
  r.details["variance"] = fm.variance;
  r.details["normalized_m4"] = fm.normalized_m4;
  r.details["bound"] = bound;
  r.details["mc_error"] = mc_error;
  r.set_verdict();
  r.runtime_seconds = seconds_since(start);
  return r;
}

double brownian_condition_a(std::size_t n) {
  const double nd = static_cast<double>(n);
  return 2.0 * nd / ((nd + 2.0) * (2.0 * nd + 3.0));
}

BrownianSample sample_brownian_example(const BrownianExampleConfig& c) {
  if (c.n < 1) throw std::invalid_argument("brownian example: n must be positive");
  if (c.fine_steps < 1) throw std::invalid_argument("brownian example: fine_steps must be positive");
  const double nd = static_cast<double>(c.n);
  const double t0 = std::max(0.0, 1.0 - 50.0 / nd);
  const std::size_t steps = c.fine_steps;
  const double dt = (1.0 - t0) / static_cast<double>(steps);
  // Cell integrals of the deterministic weights.
  std::vector<double> f_weight(steps), sq_weight(steps), cross_weight(steps), t(steps);
  auto cell_integral = [&](double a, double b, double p) {
    return (std::pow(b, p + 1.0) - std::pow(a, p + 1.0)) / (p + 1.0);
  };
  for (std::size_t k = 0; k < steps; ++k) {
    const double a = t0 + dt * static_cast<double>(k);
    const double b = k + 1 == steps ? 1.0 : a + dt;
    t[k] = a;
    f_weight[k] = std::sqrt(nd * cell_integral(a, b, 2.0 * nd) / (b - a));
    sq_weight[k] = nd * cell_integral(a, b, 2.0 * nd);
    cross_weight[k] = std::sqrt(nd) * cell_integral(a, b, nd);
  }
  BrownianSample s;
  s.f_n.assign(c.m, 0.0);
  s.u_dot_df.assign(c.m, 0.0);
  s.w1.assign(c.m, 0.0);
  const double sqrt_dt = std::sqrt(dt);
  parallel_for(c.m, [&](std::size_t i) {
    NormalStream z(c.seed, i, StreamTag::brownian);
    double w = std::sqrt(t0) * z();
    double f = 0.0, ud = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      const double dw = sqrt_dt * z();
      ud += sq_weight[k] * w * w + cross_weight[k] * w * f;
      f += f_weight[k] * w * dw;
      w += dw;
    }
    s.f_n[i] = f;
    s.u_dot_df[i] = ud;
    s.w1[i] = w;
  });
  return s;
}

std::vector<double> brownian_limit_sample(std::size_t m, std::uint64_t seed) {
  std::vector<double> out(m);
  parallel_for(m, [&](std::size_t i) {
    NormalStream z(seed, i, StreamTag::auxiliary);
    const double w = z();
    out[i] = w * z() / std::sqrt(2.0);
  });
  return out;
}

TestReport brownian_example_run(const BrownianExampleConfig& c) {
  const auto start = Clock::now();
  const BrownianSample s = sample_brownian_example(c);
  const Moments ud = sample_moments(s.u_dot_df);
  std::vector<double> f2(c.m), s2(c.m);
  const std::vector<double> limit = brownian_limit_sample(c.m, c.seed);
  for (std::size_t i = 0; i < c.m; ++i) {
    f2[i] = s.f_n[i] * s.f_n[i];
    s2[i] = 0.5 * s.w1[i] * s.w1[i];
  }
  const Moments fm = sample_moments(f2);
  const TestReport ks = ks_two_sample(s.f_n, limit);
  const TestReport cf = conditional_cf_test(s.f_n, s2);
  TestReport r;
  r.name = "example_brownian";
  r.sample_sizes = {c.m};
  r.seeds = {c.seed};
  const double ud_ratio = std::abs(ud.mean - 0.5) / (3.0 * ud.std_error);
  const double f2_ratio = std::abs(fm.mean - 0.5) / (3.0 * fm.std_error);
  r.details["n"] = c.n;
  r.details["fine_steps"] = c.fine_steps;
  r.details["mean_u_dot_df"] = ud.mean;
  r.details["se_u_dot_df"] = ud.std_error;
  r.details["mean_f_sq"] = fm.mean;
  r.details["se_f_sq"] = fm.std_error;
  r.details["exact_mean_f_sq"] = c.n / (2.0 * c.n + 2.0);
  r.details["condition_a"] = brownian_condition_a(c.n);
  r.details["ks"] = ks.to_json(false);
  r.details["conditional_cf"] = cf.to_json(false);
  r.details["checks"] = {{"mean_u_dot_df", ud_ratio <= 1.0},
                         {"mean_f_sq", f2_ratio <= 1.0},
                         {"ks", ks.pass},
                         {"conditional_cf", cf.pass}};
  // Each sub-check is scaled so that 1 is its threshold.
  r.statistic = std::max({ud_ratio, f2_ratio, ks.statistic / ks.threshold, cf.statistic / cf.threshold});
  r.threshold = 1.0;
  r.set_verdict();
  r.runtime_seconds = seconds_since(start);
  return r;
}

}  // namespace chaoslab
