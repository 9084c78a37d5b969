#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "chaoslab/fbm.hpp"
#include "chaoslab/hermite.hpp"
#include "chaoslab/malliavin.hpp"
#include "chaoslab/parallel.hpp"
#include "chaoslab/rng.hpp"
#include "chaoslab/suites.hpp"
#include "chaoslab/variations.hpp"

namespace chaoslab {

using nlohmann::ordered_json;
using SpacePtr = std::shared_ptr<const GaussianSpace>;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t uniform_index(NormalStream& z, std::size_t count) {
  return std::min(count - 1, static_cast<std::size_t>(z.uniform() * static_cast<double>(count)));
}

SpacePtr random_space(NormalStream& z, std::size_t d, bool deficient) {
  Eigen::MatrixXd a(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) a(i, j) = z();
  if (deficient && d > 1) a.col(static_cast<Eigen::Index>(d - 1)).setZero();
  Eigen::MatrixXd g = a * a.transpose() / static_cast<double>(d);
  if (!deficient) g += 0.1 * Eigen::MatrixXd::Identity(d, d);
  return GaussianSpace::create(g);
}

PolyRV random_poly(const SpacePtr& space, NormalStream& z, int max_degree, int terms) {
  const std::size_t r = space->rank();
  PolyRV::Terms t;
  for (int i = 0; i < terms; ++i) {
    Monomial mono(r, 0);
    const int deg = static_cast<int>(uniform_index(z, static_cast<std::size_t>(max_degree) + 1));
    for (int u = 0; u < deg; ++u) ++mono[uniform_index(z, r)];
    t[mono] += z();
  }
  return PolyRV(space, std::move(t));
}

RVTensor random_field(const SpacePtr& space, NormalStream& z, int order, int max_degree, bool symmetric,
                      Basis basis = Basis::orthonormal) {
  RVTensor u(space, order, basis);
  for (std::size_t f = 0; f < u.size(); ++f) u[f] = random_poly(space, z, max_degree, 2);
  if (basis == Basis::raw) u = u.to_orthonormal();
  return symmetric ? u.symmetrized() : u;
}

PolyRV delta_all(const RVTensor& t) { return t.order() == 0 ? t[0] : skorohod(t); }

double scale_of(double a, double b) { return std::max({1.0, std::abs(a), std::abs(b)}); }

/// Worst absolute error of one identity family; the relative error is reported alongside.
struct ErrorTally {
  double abs_err = 0.0;
  double rel_err = 0.0;
  std::size_t instances = 0;
  void add(double err, double scale) {
    abs_err = std::max(abs_err, err);
    rel_err = std::max(rel_err, err / std::max(1.0, scale));
    ++instances;
  }
  void add_poly(const PolyRV& lhs, const PolyRV& rhs) {
    add(max_abs_diff(lhs, rhs), std::max(lhs.max_abs_coefficient(), rhs.max_abs_coefficient()));
  }
  ordered_json details() const {
    return {{"instances", instances}, {"max_abs_error", abs_err}, {"max_rel_error", rel_err}};
  }
};

struct InstanceShape {
  SpacePtr space;
  int q;
};

InstanceShape random_shape(NormalStream& z, int max_q) {
  const std::size_t d = 1 + uniform_index(z, 4);
  const bool deficient = d > 1 && z.uniform() < 0.25;
  return {random_space(z, d, deficient), 1 + static_cast<int>(uniform_index(z, static_cast<std::size_t>(max_q)))};
}

}  // namespace

SuiteResult run_identities(const RunConfig& config) {
  const auto start = Clock::now();
  const std::size_t instances = config.m.value_or(200);
  const double tol = config.tolerance("identity", 1e-9);
  const double iso_tol = config.tolerance("isometry", 1e-10);
  const std::uint64_t seed = config.seed;
  CheckList checks;
  ordered_json timing = ordered_json::object();

  // Families are drawn from disjoint stream indices.
  auto stream = [&](std::size_t family, std::size_t i) {
    return NormalStream(seed, family * 1000003ULL + i, StreamTag::identities);
  };
  auto run_family = [&](std::size_t family, const auto& body) {
    std::vector<ErrorTally> per(instances);
    parallel_for(instances, [&](std::size_t i) {
      NormalStream z = stream(family, i);
      body(z, per[i]);
    });
    ErrorTally all;
    for (const auto& t : per) {
      all.abs_err = std::max(all.abs_err, t.abs_err);
      all.rel_err = std::max(all.rel_err, t.rel_err);
      all.instances += t.instances;
    }
    return all;
  };
  auto record = [&](const std::string& name, const ErrorTally& t, double threshold, Clock::time_point t0) {
    checks.add(name, t.abs_err, threshold, t.details());
    timing[name] = seconds_since(t0);
  };

  auto t0 = Clock::now();
  // E[F delta^q(u)] = E[<D^q F, u>], u given in the raw basis.
  const ErrorTally duality = run_family(0, [](NormalStream& z, ErrorTally& tally) {
    const InstanceShape s = random_shape(z, 3);
    const PolyRV f = random_poly(s.space, z, 5, 4);
    const RVTensor u = random_field(s.space, z, s.q, 3, false, Basis::raw);
    const double lhs = wick_expectation(f * skorohod(u));
    const double rhs = wick_expectation(full_pairing(derivative(f, s.q), u));
    tally.add(std::abs(lhs - rhs), scale_of(lhs, rhs));
  });
  record("duality", duality, tol, t0);

  t0 = Clock::now();
  // F delta^q(u) = sum_r C(q,r) delta^{q-r}(<D^r F, u>_r), u symmetric.
  const ErrorTally product = run_family(1, [](NormalStream& z, ErrorTally& tally) {
    const InstanceShape s = random_shape(z, 3);
    const PolyRV f = random_poly(s.space, z, 5, 4);
    const RVTensor u = random_field(s.space, z, s.q, 3, true);
    const PolyRV lhs = f * skorohod(u);
    RVTensor fu = u;
    for (std::size_t i = 0; i < fu.size(); ++i) fu[i] = f * u[i];
    PolyRV rhs = skorohod(fu);
    for (int r = 1; r <= s.q; ++r) rhs += binomial(s.q, r) * delta_all(pair_last(u, derivative(f, r)));
    tally.add_poly(lhs, rhs);
  });
  record("product_formula", product, tol, t0);

  t0 = Clock::now();
  // D^k delta^j(u) = Sym sum_i C(k,i) C(j,i) i! delta^{j-i}(D^{k-i} u), j, k <= 2.
  const ErrorTally commutation = run_family(2, [](NormalStream& z, ErrorTally& tally) {
    const InstanceShape s = random_shape(z, 2);
    const int j = s.q;
    const int k = 1 + static_cast<int>(uniform_index(z, 2));
    const RVTensor u = random_field(s.space, z, j, 3, true);
    const RVTensor lhs = derivative(skorohod(u), k);
    RVTensor rhs(s.space, k, Basis::orthonormal);
    for (int i = 0; i <= std::min(j, k); ++i) {
      const RVTensor du = k - i > 0 ? derivative(u, k - i) : u;
      const RVTensor term = divergence(du, j - i);
      rhs += (binomial(k, i) * binomial(j, i) * factorial(i)) * term.symmetrized();
    }
    double scale = 1.0;
    for (std::size_t f = 0; f < lhs.size(); ++f) scale = std::max(scale, lhs[f].max_abs_coefficient());
    tally.add(lhs.max_abs_diff(rhs), scale);
  });
  record("commutation", commutation, tol, t0);

  t0 = Clock::now();
  // E[delta^q(u) delta^q(v)] = sum_i C(q,i)^2 i! E[<D^{q-i} u, (D^{q-i} v) paired crosswise>].
  const ErrorTally covariance = run_family(3, [](NormalStream& z, ErrorTally& tally) {
    const InstanceShape s = random_shape(z, 3);
    const int q = s.q;
    const int deg = q == 3 ? 2 : 3;
    const RVTensor u = random_field(s.space, z, q, deg, true);
    const RVTensor v = random_field(s.space, z, q, deg, true);
    const double lhs = wick_expectation(skorohod(u) * skorohod(v));
    double rhs = 0.0;
    for (int i = 0; i <= q; ++i) {
      const int p = q - i;
      const double w = binomial(q, i) * binomial(q, i) * factorial(i);
      if (p == 0) {
        rhs += w * wick_expectation(full_pairing(u, v));
        continue;
      }
      const RVTensor a = derivative(u, p);
      const RVTensor b = derivative(v, p);
      std::vector<int> perm;
      for (int t = 0; t < p; ++t) perm.push_back(q + t);
      for (int t = 0; t < q; ++t) perm.push_back(t);
      rhs += w * wick_expectation(full_pairing(a, b.permuted(perm)));
    }
    tally.add(std::abs(lhs - rhs), scale_of(lhs, rhs));
  });
  record("skorohod_covariance", covariance, tol, t0);

  t0 = Clock::now();
  // E[I_q(f)^2] = q! <f, f> for symmetric f of unit norm.
  const ErrorTally isometry = run_family(4, [](NormalStream& z, ErrorTally& tally) {
    const InstanceShape s = random_shape(z, 3);
    const std::size_t d = s.space->dimension();
    Tensor f(d, s.q);
    for (std::size_t i = 0; i < f.shape().size(); ++i) f[i] = z();
    // Drop the kernel part of each slot: it is the zero element but would be
    // amplified by the normalization below.
    const Eigen::MatrixXd& fac = s.space->factor();
    const Eigen::MatrixXd range = fac * (fac.transpose() * fac).ldlt().solve(fac.transpose());
    f = f.transformed(range).symmetrized();
    const double norm2 = inner(f, f, s.space->gram());
    if (norm2 < 1e-12) return;
    f *= 1.0 / std::sqrt(norm2);
    const IntegralResult integral = multiple_integral(f, s.space);
    const double lhs = wick_expectation(integral.value * integral.value);
    const double rhs = factorial(s.q) * inner(f, f, s.space->gram());
    tally.add(std::abs(lhs - rhs), 1.0);
  });
  record("isometry", isometry, iso_tol, t0);

  t0 = Clock::now();
  // -delta(DF) = -sum_q q J_q F.
  const ErrorTally generator = run_family(5, [](NormalStream& z, ErrorTally& tally) {
    const InstanceShape s = random_shape(z, 1);
    const PolyRV f = random_poly(s.space, z, 5, 5);
    tally.add_poly(ou_generator(f), ou_generator_chaos(f));
  });
  record("generator", generator, tol, t0);

  t0 = Clock::now();
  double fd_err = 0.0;
  const double h = 1e-6;
  for (int q = 1; q <= Tensor::kMaxOrder; ++q) {
    for (int i = 0; i <= 200; ++i) {
      const double x = -5.0 + 0.05 * i;
      const double fd = (hermite_eval(q, x + h, Normalization::monic) - hermite_eval(q, x - h, Normalization::monic)) /
                        (2.0 * h);
      fd_err = std::max(fd_err, std::abs(fd - q * hermite_eval(q - 1, x, Normalization::monic)));
    }
  }
  checks.add("hermite_derivative", fd_err, config.tolerance("hermite_fd", 1e-5),
             {{"step", h}, {"orders", Tensor::kMaxOrder}, {"interval", {-5.0, 5.0}}});
  timing["hermite_derivative"] = seconds_since(t0);

  SuiteResult out;
  out.report["suite"] = "identities";
  RunConfig echo = config;
  echo.m = instances;
  out.report["config"] = echo.to_json();
  out.report["checks"] = checks.json();
  out.report["verdict"] = checks.pass() ? "pass" : "fail";
  out.pass = checks.pass();
  out.meta["runtime_seconds"] = seconds_since(start);
  out.meta["check_runtimes"] = timing;
  return out;
}


namespace {

const std::vector<double> kPropertyHursts = {0.1, 0.2, 0.3, 0.4, 0.45};

ordered_json regime_json(const RegimeSpec& r) {
  return {{"q", r.q},
          {"H", r.hurst},
          {"regime", to_string(r.regime)},
          {"lower_threshold", r.lower_threshold},
          {"upper_threshold", r.upper_threshold},
          {"scaling", r.scaling},
          {"limit", r.limit}};
}

/// Upper bound for sum_{r in Z} |rho(r)|^q when H < 1/2, using
/// |rho(r)| <= H (1 - 2H) (r - 1)^{2H - 2} beyond the explicit lags.
double abs_rho_power_sum_bound(double hurst, int q) {
  const long long lags = 1LL << 20;
  long double acc = 0.0L;
  for (long long r = lags; r >= 1; --r) acc += std::pow(std::abs(static_cast<long double>(rho(hurst, r))), q);
  const double s = q * (2.0 - 2.0 * hurst);
  const double tail = std::pow(hurst * (1.0 - 2.0 * hurst), q) * std::pow(static_cast<double>(lags - 1), 1.0 - s) / (s - 1.0);
  return 1.0 + 2.0 * static_cast<double>(acc) + 2.0 * tail;
}

}  // namespace

SuiteResult run_fbm_properties(const RunConfig& config) {
  const auto start = Clock::now();
  const std::vector<double> hursts = config.hurst ? std::vector<double>{*config.hurst} : kPropertyHursts;
  for (double h : hursts) {
    if (!(h < 0.5)) throw std::invalid_argument("fbm properties: H must lie below 1/2");
  }
  const std::size_t triples = config.m.value_or(10000);
  CheckList checks;
  ordered_json results = ordered_json::object();
  ordered_json timing = ordered_json::object();

  auto t0 = Clock::now();
  {
    double worst = 0.0;
    for (std::size_t hi = 0; hi < hursts.size(); ++hi) {
      const double h = hursts[hi];
      NormalStream z(config.seed, hi, StreamTag::auxiliary);
      for (std::size_t i = 0; i < triples; ++i) {
        const double r = z.uniform();
        double s = z.uniform(), t = z.uniform();
        if (s > t) std::swap(s, t);
        if (t - s < 1e-12) continue;
        const double lhs = std::abs(cov_rh(h, r, t) - cov_rh(h, r, s));
        worst = std::max(worst, lhs / std::pow(t - s, 2.0 * h));
      }
    }
    checks.add("increment_covariance_bound", worst, 1.0 + 1e-12,
               {{"triples_per_H", triples}, {"H", hursts}, {"max_ratio", worst}});
  }
  timing["increment_covariance_bound"] = seconds_since(t0);

  t0 = Clock::now();
  {
    // sup_t |<eps_t, del_k>| n^{2H} and sup_t sum_k |<eps_t, del_k>|.
    const std::vector<std::size_t> sizes = {8, 64, 512};
    double worst_pointwise = 0.0;
    double worst_growth = 0.0;
    ordered_json sums = ordered_json::object();
    for (std::size_t hi = 0; hi < hursts.size(); ++hi) {
      const double h = hursts[hi];
      std::vector<double> sup_sum(sizes.size(), 0.0);
      for (std::size_t si = 0; si < sizes.size(); ++si) {
        const std::size_t n = sizes[si];
        std::vector<double> ts;
        for (std::size_t j = 0; j <= 4 * n; ++j) ts.push_back(static_cast<double>(j) / (4.0 * n));
        NormalStream z(config.seed, 100 + hi * sizes.size() + si, StreamTag::auxiliary);
        for (int j = 0; j < 200; ++j) ts.push_back(z.uniform());
        std::vector<double> point(ts.size()), total(ts.size());
        parallel_for(ts.size(), [&](std::size_t ti) {
          double p = 0.0, acc = 0.0;
          for (std::size_t k = 0; k < n; ++k) {
            const double v = std::abs(eps_del(h, n, ts[ti], k));
            p = std::max(p, v);
            acc += v;
          }
          point[ti] = p;
          total[ti] = acc;
        });
        const double pn = *std::max_element(point.begin(), point.end()) * std::pow(static_cast<double>(n), 2.0 * h);
        worst_pointwise = std::max(worst_pointwise, pn);
        sup_sum[si] = *std::max_element(total.begin(), total.end());
      }
      worst_growth = std::max(worst_growth, sup_sum.back() / (2.0 * sup_sum.front() + 1.0));
      sums[std::to_string(h)] = sup_sum;
    }
    checks.add("pointwise_eps_del_bound", worst_pointwise, 1.0 + 1e-12, {{"n", sizes}});
    checks.add("uniform_eps_del_sum", worst_growth, 1.0,
               {{"n", sizes}, {"sup_sum_by_H", sums}, {"statistic", "sup_sum(512) / (2 sup_sum(8) + 1)"}});
  }
  timing["eps_del"] = seconds_since(t0);

  t0 = Clock::now();
  {
    std::vector<std::size_t> sizes;
    for (std::size_t n = 8; n <= 4096; n *= 2) sizes.push_back(n);
    double worst_diag = 0.0, worst_beta = 0.0, worst_lag_form = 0.0;
    ordered_json diag_seq = ordered_json::object(), beta_seq = ordered_json::object();
    for (int q : {2, 3}) {
      const double diag_bound = (std::pow(2.0, q) - 1.0) / std::pow(2.0, q);
      for (double h : hursts) {
        const std::string key = "q" + std::to_string(q) + "_H" + std::to_string(h);
        const double beta_bound = abs_rho_power_sum_bound(h, q);
        std::vector<double> dseq, bseq;
        for (std::size_t n : sizes) {
          const double nn = static_cast<double>(n);
          const double target = (q % 2 == 0 ? 1.0 : -1.0) / (std::pow(2.0, q) * std::pow(nn, 2.0 * q * h));
          double d = 0.0;
          for (std::size_t k = 0; k < n; ++k) d += std::abs(std::pow(grid_alpha(h, n, k, k), q) - target);
          d *= std::pow(nn, 2.0 * h * (q - 1));
          dseq.push_back(d);
          worst_diag = std::max(worst_diag, d / diag_bound);

          // Lag form for all n; the direct double sum cross-checks it up to n = 512.
          long double lag_sum = 0.0L;
          for (std::size_t r = n - 1; r >= 1; --r)
            lag_sum += 2.0L * static_cast<long double>(nn - r) * std::pow(std::abs(rho(h, static_cast<long long>(r))), q);
          lag_sum += nn;
          const double b = static_cast<double>(lag_sum) / nn;
          if (n <= 512) {
            std::vector<double> rows(n);
            parallel_for(n, [&](std::size_t k) {
              double acc = 0.0;
              for (std::size_t j = 0; j < n; ++j) acc += std::pow(std::abs(grid_beta(h, n, k, j)), q);
              rows[k] = acc;
            });
            const double direct = pairwise_sum(rows) * std::pow(nn, 2.0 * q * h - 1.0);
            worst_lag_form = std::max(worst_lag_form, std::abs(direct - b) / b);
          }
          bseq.push_back(b);
          worst_beta = std::max(worst_beta, b / beta_bound);
        }
        diag_seq[key] = dseq;
        beta_seq[key] = {{"sequence", bseq}, {"bound", beta_bound}};
      }
    }
    checks.add("diagonal_alpha_rate", worst_diag, 1.0,
               {{"n", sizes}, {"bound", "(2^q - 1) / 2^q"}, {"sequences", diag_seq}});
    checks.add("beta_power_rate", worst_beta, 1.0, {{"n", sizes}, {"sequences", beta_seq}});
    checks.add("beta_lag_form_consistency", worst_lag_form, 1e-10);
  }
  timing["rates"] = seconds_since(t0);

  t0 = Clock::now();
  {
    double worst = 0.0;
    std::vector<double> hs = hursts;
    hs.push_back(0.5);
    hs.push_back(0.7);
    for (double h : hs) {
      for (std::size_t n : {8, 64}) {
        FbmSampler sampler(FbmGrid{h, n}, SamplingMethod::cholesky);
        const Eigen::MatrixXd& l = sampler.cholesky_factor();
        worst = std::max(worst, (l * l.transpose() - increment_covariance(FbmGrid{h, n})).cwiseAbs().maxCoeff());
      }
    }
    checks.add("cholesky_reconstruction", worst, 1e-10, {{"n", {8, 64}}});

    double most_negative = 0.0;
    for (double h : hs) {
      for (std::size_t n : {64, 4096}) {
        const std::vector<double> lam = embedding_spectrum(FbmGrid{h, n});
        const double mx = *std::max_element(lam.begin(), lam.end());
        const double mn = *std::min_element(lam.begin(), lam.end());
        most_negative = std::max(most_negative, -mn / mx);
      }
    }
    checks.add("embedding_nonnegative", most_negative, 1e-8, {{"n", {64, 4096}}});

    bool identical = true;
    for (SamplingMethod method : {SamplingMethod::cholesky, SamplingMethod::circulant}) {
      FbmSampler sampler(FbmGrid{hursts.front(), 64}, method);
      const FbmPathBatch a = sampler.sample(config.seed, 130);
      const FbmPathBatch b = sampler.sample(config.seed, 130);
      identical = identical && a.increments == b.increments;
    }
    checks.add_flag("sampler_determinism", identical);
  }
  timing["sampler"] = seconds_since(t0);

  SuiteResult out;
  out.report["suite"] = "fbm_properties";
  RunConfig echo = config;
  echo.m = triples;
  out.report["config"] = echo.to_json();
  out.report["checks"] = checks.json();
  out.report["results"] = results;
  out.report["verdict"] = checks.pass() ? "pass" : "fail";
  out.pass = checks.pass();
  out.meta["runtime_seconds"] = seconds_since(start);
  out.meta["check_runtimes"] = timing;
  return out;
}

namespace {

/// Symbolic comparison of the closed form and the decomposition on the grid
/// Gaussian space spanned by the increments.
struct OracleErrors {
  double closed_form = 0.0;
  double pathwise = 0.0;
  double decomposition = 0.0;
  std::size_t cases = 0;
};

OracleErrors grid_oracle(double hurst, std::size_t n, int q, const WeightFunction& f, std::uint64_t seed) {
  const FbmGrid grid{hurst, n};
  const SpacePtr space = GaussianSpace::create(increment_covariance(grid));
  const PolyRV one = PolyRV::constant(space, 1.0);
  const double nn = static_cast<double>(n);
  const double del_norm = std::pow(nn, -hurst);
  OracleErrors err;
  NormalStream z(seed, n * 64 + static_cast<std::size_t>(q), StreamTag::identities);
  std::vector<std::vector<double>> draws(4, std::vector<double>(space->rank()));
  for (auto& d : draws)
    for (double& v : d) v = z();

  PolyRV lhs(space), rhs(space);
  for (std::size_t k = 0; k < n; ++k) {
    HilbertVec level_vec{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))};
    for (std::size_t i = 0; i < k; ++i) level_vec.coeffs(static_cast<Eigen::Index>(i)) = 1.0;
    const PolyRV level = PolyRV::gaussian(space, level_vec);
    const PolyRV increment = PolyRV::gaussian(space, HilbertVec::basis(n, k));
    const double alpha = grid_alpha(hurst, n, k, k);
    lhs += level.compose(f.derivative_coefficients(0)) * hermite_monic(q, increment * (1.0 / del_norm), one);
    for (int r = 0; r <= q; ++r) {
      const int p = q - r;
      const PolyRV weight = level.compose(f.derivative_coefficients(r));
      PolyRV oracle = weight;
      if (p > 0) {
        std::vector<Eigen::VectorXd> axes(static_cast<std::size_t>(p), HilbertVec::basis(n, k).coeffs);
        oracle = skorohod(RVTensor::scaled(weight, Tensor::product_of(axes), Basis::raw).to_orthonormal());
      }
      const PolyRV closed = skorohod_closed_form<PolyRV>(
          level, increment, alpha, del_norm, p,
          [&](int j, const PolyRV& x) { return x.compose(f.derivative_coefficients(r + j)); }, one);
      err.closed_form = std::max(err.closed_form, max_abs_diff(oracle, closed));
      for (const auto& d : draws) {
        const double value =
            skorohod_weighted_closed_form(level.evaluate(d), increment.evaluate(d), alpha, del_norm, q, f, r);
        err.pathwise = std::max(err.pathwise, std::abs(value - oracle.evaluate(d)));
      }
      rhs += (binomial(q, r) * std::pow(alpha, r) * std::pow(nn, q * hurst)) * oracle;
      ++err.cases;
    }
  }
  err.decomposition = max_abs_diff(lhs * (1.0 / std::sqrt(nn)), rhs * (1.0 / std::sqrt(nn)));
  return err;
}

}  // namespace

SuiteResult run_decomposition_suite(const RunConfig& config) {
  const auto start = Clock::now();
  const double tol = config.tolerance("decomposition", 1e-8);
  const std::vector<int> qs = config.q ? std::vector<int>{*config.q} : std::vector<int>{1, 2, 3};
  const std::vector<double> hs = config.hurst ? std::vector<double>{*config.hurst} : std::vector<double>{0.15, 0.3, 0.45};
  const std::vector<std::size_t> ns = config.n.empty() ? std::vector<std::size_t>{16, 64, 256} : config.n;
  const std::size_t m = config.m.value_or(8);
  const std::vector<std::string> weights =
      config.weight ? std::vector<std::string>{*config.weight} : std::vector<std::string>{"poly:0.5,-1,0.25,0.1,0.05", "cos:1,0.5"};
  CheckList checks;
  ordered_json timing = ordered_json::object();

  auto t0 = Clock::now();
  double worst = 0.0;
  ordered_json cells = ordered_json::array();
  for (const std::string& w : weights) {
    const WeightFunction f = WeightFunction::parse(w);
    for (int q : qs) {
      for (double h : hs) {
        for (std::size_t n : ns) {
          const FbmPathBatch batch = sample_paths(FbmGrid{h, n}, m, config.seed, config.method);
          const VariationResult v = decompose_gn(batch, q, f, config.normalization);
          double cell = 0.0;
          for (double r : v.residual) cell = std::max(cell, std::abs(r));
          worst = std::max(worst, cell);
          cells.push_back({{"weight", w}, {"q", q}, {"H", h}, {"n", n}, {"max_abs_residual", cell}});
        }
      }
    }
  }
  checks.add("decomposition_residual", worst, tol, {{"paths_per_cell", m}, {"cells", cells}});
  timing["decomposition_residual"] = seconds_since(t0);

  t0 = Clock::now();
  const WeightFunction poly = WeightFunction::parse("poly:0.5,-1,0.25,0.1,0.05");
  OracleErrors total;
  for (int q : qs) {
    for (double h : hs) {
      for (std::size_t n : {4, 8}) {
        const OracleErrors e = grid_oracle(h, n, q, poly, config.seed);
        total.closed_form = std::max(total.closed_form, e.closed_form);
        total.pathwise = std::max(total.pathwise, e.pathwise);
        total.decomposition = std::max(total.decomposition, e.decomposition);
        total.cases += e.cases;
      }
    }
  }
  checks.add("closed_form_vs_oracle", total.closed_form, tol, {{"cases", total.cases}, {"n", {4, 8}}});
  checks.add("closed_form_pathwise", total.pathwise, tol, {{"draws_per_case", 4}});
  checks.add("decomposition_symbolic", total.decomposition, tol);
  timing["oracle"] = seconds_since(t0);

  SuiteResult out;
  out.report["suite"] = "decomposition";
  RunConfig echo = config;
  echo.m = m;
  echo.n = ns;
  out.report["config"] = echo.to_json();
  out.report["checks"] = checks.json();
  out.report["verdict"] = checks.pass() ? "pass" : "fail";
  out.pass = checks.pass();
  out.meta["runtime_seconds"] = seconds_since(start);
  out.meta["check_runtimes"] = timing;
  return out;
}

SuiteResult run_constants(const RunConfig& config) {
  const auto start = Clock::now();
  const int q = config.q.value_or(2);
  const double h = config.hurst.value_or(0.5);
  CheckList checks;
  ordered_json results;
  std::vector<double> rhos;
  for (long long r = 0; r <= 8; ++r) rhos.push_back(rho(h, r));
  results["rho"] = rhos;
  if (q >= 2) results["regime"] = regime_json(classify_regime(q, h));
  results["correction_constant"] = {{"monic", correction_constant(q, Normalization::monic)},
                                    {"scaled", correction_constant(q, Normalization::scaled)}};
  try {
    const SigmaResult s = sigma_hq(h, q, config.tolerance("sigma", 1e-12));
    results["sigma"] = s.sigma;
    results["sigma_sq"] = s.sigma_sq;
    results["sigma_terms"] = s.terms;
    results["sigma_tail_estimate"] = s.tail_estimate;
    checks.add_flag("sigma_positive", s.sigma_sq > 0.0, {{"sigma_sq", s.sigma_sq}});
  } catch (const std::domain_error& e) {
    results["sigma"] = nullptr;
    results["sigma_sq"] = nullptr;
    results["sigma_note"] = e.what();
  }
  if (q >= 2) {
    ordered_json map = ordered_json::array();
    for (int i = 1; i < 20; ++i) {
      const double hh = 0.05 * i;
      map.push_back({{"H", hh}, {"regime", to_string(classify_regime(q, hh).regime)}});
    }
    results["regime_map"] = map;
  }

  SuiteResult out;
  out.report["suite"] = "constants";
  RunConfig echo = config;
  echo.q = q;
  echo.hurst = h;
  out.report["config"] = echo.to_json();
  out.report["checks"] = checks.json();
  out.report["results"] = results;
  out.report["verdict"] = checks.pass() ? "pass" : "fail";
  out.pass = checks.pass();
  out.meta["runtime_seconds"] = seconds_since(start);
  return out;
}

}  // namespace chaoslab
