#include <cmath>

#include "chaoslab/fbm.hpp"
#include "chaoslab/parallel.hpp"
#include "chaoslab/variations.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace chaoslab;
using doctest::Approx;

namespace {

double fd_derivative(const WeightFunction& f, int order, double x) {
  const double h = 1e-4;
  return (f.derivative(order - 1, x + h) - f.derivative(order - 1, x - h)) / (2 * h);
}

/// sigma^2 = q! sum_r rho^q summed in long double over 2^22 lags plus the
/// integral tail of the asymptotic term.
double sigma_sq_oracle(double h, int q) {
  const long long lags = 1LL << 22;
  long double acc = 0.0L;
  for (long long r = lags; r >= 1; --r) acc += std::pow(static_cast<long double>(oracle::rho(h, r)), q);
  const double s = q * (2.0 - 2.0 * h);
  const double tail = std::pow(h * (2 * h - 1), q) * std::pow(lags + 0.5, 1.0 - s) / (s - 1.0);
  return std::tgamma(q + 1.0) * (1.0 + 2.0 * (static_cast<double>(acc) + tail));
}

}  // namespace

TEST_CASE("weight functions") {
  const WeightFunction c = WeightFunction::parse("cos:2,0.5");
  CHECK(c(1.0) == Approx(2.0 * std::cos(0.5)));
  CHECK(c.to_string() == "cos:2,0.5");
  const WeightFunction e = WeightFunction::parse("expq:0.7");
  CHECK(e(1.3) == Approx(std::exp(-0.7 * 1.69)));
  const WeightFunction p = WeightFunction::parse("poly:1,-2,0.5");
  CHECK(p(2.0) == Approx(1.0 - 4.0 + 2.0));
  for (const auto* w : {&c, &e, &p}) {
    for (int order = 1; order <= 6; ++order) {
      for (double x : {-1.7, 0.0, 0.4, 2.2}) {
        CHECK(w->derivative(order, x) == Approx(fd_derivative(*w, order, x)).epsilon(1e-6).scale(1.0));
      }
    }
  }
  CHECK(p.derivative_is_zero(3));
  CHECK_FALSE(p.derivative_is_zero(2));
  CHECK_THROWS_AS(c.derivative(WeightFunction::kMaxDerivative + 1, 0.0), std::out_of_range);
  CHECK_THROWS(WeightFunction::parse("sin:1"));
  CHECK_THROWS(WeightFunction::parse("cos:1"));
  CHECK_THROWS(WeightFunction::parse("poly:"));
}

TEST_CASE("regime classification") {
  CHECK(classify_regime(2, 0.25).regime == Regime::critical_lower);
  CHECK(classify_regime(3, 1.0 / 6.0).regime == Regime::critical_lower);
  CHECK(classify_regime(2, 0.9).regime == Regime::hermite);
  CHECK(classify_regime(2, 0.75).regime == Regime::critical_upper);
  CHECK(classify_regime(2, 0.1).regime == Regime::lower);
  CHECK(classify_regime(2, 0.5).regime == Regime::mixed_clt);
  for (int q : {2, 3, 4}) {
    const double b = 1.0 / (2.0 * q);
    CHECK(classify_regime(q, b - 1e-9).regime == Regime::lower);
    CHECK(classify_regime(q, b + 1e-9).regime == Regime::mixed_clt);
    CHECK(classify_regime(q, 1.0 - b - 1e-9).regime == Regime::mixed_clt);
    CHECK(classify_regime(q, 1.0 - b + 1e-9).regime == Regime::hermite);
  }
  CHECK_THROWS(classify_regime(1, 0.3));
  CHECK(classify_regime(2, 0.75).renormalization(100) == Approx(1.0 / std::sqrt(std::log(100.0))));
}

TEST_CASE("sigma constant") {
  CHECK(sigma_hq(0.5, 2, 1e-12).sigma_sq == Approx(2.0).epsilon(1e-14));
  CHECK(sigma_hq(0.5, 3, 1e-12).sigma_sq == Approx(6.0).epsilon(1e-14));
  const double a = sigma_hq(0.25, 2, 1e-10).sigma_sq;
  const double b = sigma_hq(0.25, 2, 5e-11).sigma_sq;
  CHECK(a > 0.0);
  CHECK(std::abs(a - b) <= 1e-10);
  for (double h : {0.1, 0.3, 0.45, 0.6}) {
    CHECK(sigma_hq(h, 2).sigma_sq == Approx(sigma_sq_oracle(h, 2)).epsilon(1e-9));
    CHECK(sigma_hq(h, 3).sigma_sq == Approx(sigma_sq_oracle(h, 3)).epsilon(1e-9));
  }
  try {
    sigma_hq(0.75, 2);
    FAIL("expected divergence");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("divergent series") != std::string::npos);
  }
}

TEST_CASE("correction term") {
  CHECK(correction_constant(2, Normalization::monic) == Approx(0.25));
  CHECK(correction_constant(3, Normalization::monic) == Approx(-0.125));
  CHECK(correction_constant(3, Normalization::scaled) == Approx(-0.125 / 6.0));
  const FbmPathBatch b = sample_paths(FbmGrid{0.3, 32}, 5, 8);
  for (double v : correction_term(b, 2, WeightFunction::polynomial({1.0, 3.0}))) CHECK(v == 0.0);
  for (double v : correction_term(b, 2, WeightFunction::polynomial({0.0, 0.0, 1.0}))) {
    CHECK(v == Approx(0.5 * std::pow(32.0, 0.5 - 0.6)));
  }
}

TEST_CASE("weighted variation basics") {
  const FbmGrid grid{0.3, 16};
  const FbmPathBatch b = sample_paths(grid, 4, 2);
  const VariationResult zero = weighted_variation(b, 2, WeightFunction::constant(0.0));
  for (double v : zero.g_n) CHECK(v == 0.0);
  CHECK(zero.g_n.size() == 4);

  // Synthetic path with flat increments.
  std::vector<double> inc(16, 0.0);
  const FbmPathBatch flat = FbmPathBatch::from_increments(grid, 1, inc);
  const WeightFunction f = WeightFunction::cosine(1.0, 1.0);
  for (int q : {2, 3, 4}) {
    const VariationResult r = weighted_variation(flat, q, f);
    CHECK(r.g_n[0] == Approx(oracle::hermite(q, 0.0) * 16.0 * std::cos(0.0) / 4.0));
  }

  const WeightFunction g = WeightFunction::parse("expq:0.3");
  const VariationResult mon = weighted_variation(b, 3, g, Normalization::monic);
  const VariationResult sc = weighted_variation(b, 3, g, Normalization::scaled);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(sc.g_n[i] == Approx(mon.g_n[i] / 6.0).epsilon(1e-15));
    CHECK(sc.correction[i] == Approx(mon.correction[i] / 6.0).epsilon(1e-15));
  }
}

TEST_CASE("unit weight at H=1/2 has mean 0 and variance q!") {
  const std::size_t m = 1000000;
  FbmSampler s(FbmGrid{0.5, 64});
  const VariationResult r = weighted_variation(s, 17, m, 2, WeightFunction::constant(1.0));
  const Moments mo = sample_moments(r.g_n);
  CHECK(std::abs(mo.mean) <= 3.0 * mo.std_error);
  std::vector<double> sq(m);
  for (std::size_t i = 0; i < m; ++i) sq[i] = (r.g_n[i] - mo.mean) * (r.g_n[i] - mo.mean);
  const Moments v = sample_moments(sq);
  CHECK(std::abs(v.mean - 2.0) <= 3.0 * v.std_error);
}

TEST_CASE("closed-form skorohod examples") {
  const WeightFunction id = WeightFunction::polynomial({0.0, 1.0});
  const double level = 0.7, inc = -0.2, alpha = 0.13, dn = 0.4;
  CHECK(skorohod_weighted_closed_form(level, inc, alpha, dn, 1, id, 0) == Approx(level * inc - alpha));
  const WeightFunction one = WeightFunction::constant(1.0);
  for (int q = 1; q <= 5; ++q) {
    CHECK(skorohod_weighted_closed_form(level, inc, alpha, dn, q, one, 0) ==
          Approx(std::pow(dn, q) * oracle::hermite(q, inc / dn)));
  }
  const WeightFunction c = WeightFunction::cosine(1.0, 2.0);
  CHECK(skorohod_weighted_closed_form(level, inc, 0.0, dn, 3, c, 0) ==
        Approx(c(level) * std::pow(dn, 3) * oracle::hermite(3, inc / dn)));
  CHECK(skorohod_weighted_closed_form(level, inc, alpha, dn, 2, c, 2) == Approx(c.derivative(2, level)));
  CHECK_THROWS(skorohod_weighted_closed_form(level, inc, alpha, dn, 2, c, 3));
}

TEST_CASE("decomposition examples") {
  const FbmPathBatch b = sample_paths(FbmGrid{0.3, 64}, 1, 1);
  const VariationResult r1 = decompose_gn(b, 1, WeightFunction::constant(1.0));
  CHECK(r1.main_term[0] == Approx(r1.g_n[0]));
  CHECK(r1.middle.empty());
  CHECK(r1.remainder[0] == 0.0);

  const WeightFunction f = WeightFunction::parse("cos:1.5,0.8");
  const VariationResult r2 = decompose_gn(b, 1, f);
  double rem = 0.0;
  const auto lv = b.path_levels(0);
  for (std::size_t k = 0; k < 64; ++k) rem += grid_alpha(0.3, 64, k, k) * f.derivative(1, lv[k]);
  rem *= std::pow(64.0, 0.3 - 0.5);
  CHECK(r2.remainder[0] == Approx(rem).epsilon(1e-12));
  CHECK(std::abs(r2.residual[0]) <= 1e-8);

  const VariationResult r3 = decompose_gn(b, 2, WeightFunction::polynomial({0.0, 0.0, 1.0}));
  CHECK(std::abs(r3.residual[0]) <= 1e-8);
  CHECK(std::abs(r3.g_n[0] - (r3.main_term[0] + r3.middle[0][0] + r3.remainder[0])) <= 1e-8);
}

TEST_CASE("A_n statistic") {
  const FbmPathBatch b = sample_paths(FbmGrid{0.5, 128}, 3, 4);
  for (double v : a_n_statistic(b, 2, WeightFunction::constant(1.0))) CHECK(v == Approx(2.0).epsilon(1e-12));

  // FFT route against the explicit double sum.
  const std::size_t n = 300;
  const FbmPathBatch p = sample_paths(FbmGrid{0.3, n}, 2, 6);
  const WeightFunction f = WeightFunction::cosine(1.0, 1.0);
  AnStatistic stat(FbmGrid{0.3, n}, 2);
  CHECK(stat.lag_cutoff() > 32);
  const auto vals = a_n_statistic(p, 2, f);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto lv = p.path_levels(i);
    long double acc = 0.0L;
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t j = 0; j < n; ++j)
        acc += 2.0L * std::pow(oracle::rho(0.3, static_cast<long long>(l) - static_cast<long long>(j)), 2) * f(lv[l]) * f(lv[j]);
    CHECK(vals[i] == Approx(static_cast<double>(acc) / n).epsilon(1e-10));
  }

  const std::size_t big = 1 << 14;
  AnStatistic unit(FbmGrid{0.3, big}, 2);
  const std::vector<double> ones(big, 1.0);
  CHECK(std::abs(unit(ones) / sigma_hq(0.3, 2).sigma_sq - 1.0) <= 0.02);
}

TEST_CASE("mean of A_n for the identity weight") {
  const std::size_t n = 4096, m = 10000;
  FbmSampler s(FbmGrid{0.3, n});
  AnStatistic stat(s.grid(), 2);
  std::vector<double> a(m);
  s.for_each_path(21, m, [&](std::size_t i, std::span<const double> lv, std::span<const double>) {
    a[i] = stat(lv.first(n));
  });
  const Moments mo = sample_moments(a);
  CHECK(std::abs(mo.mean - sigma_hq(0.3, 2).sigma_sq / 1.6) <= 3.0 * mo.std_error);
}
