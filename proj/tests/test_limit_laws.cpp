#include <algorithm>
#include <cmath>

#include "chaoslab/fbm.hpp"
#include "chaoslab/gaussian_space.hpp"
#include "chaoslab/hermite.hpp"
#include "chaoslab/limit_laws.hpp"
#include "chaoslab/malliavin.hpp"
#include "chaoslab/parallel.hpp"
#include "chaoslab/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace chaoslab;
using doctest::Approx;

namespace {

std::vector<double> normals(std::size_t m, std::uint64_t seed, double scale = 1.0, double shift = 0.0) {
  NormalStream z(seed, 0, StreamTag::auxiliary);
  std::vector<double> out(m);
  for (double& v : out) v = shift + scale * z();
  return out;
}

}  // namespace

TEST_CASE("kolmogorov distribution") {
  CHECK(kolmogorov_quantile(0.01) == Approx(1.6276).epsilon(1e-4));
  CHECK(kolmogorov_quantile(0.05) == Approx(1.3581).epsilon(1e-4));
  CHECK(kolmogorov_tail(kolmogorov_quantile(0.2)) == Approx(0.2).epsilon(1e-9));
  CHECK_THROWS(kolmogorov_quantile(0.0));
}

TEST_CASE("two-sample KS statistic") {
  const std::vector<double> a = normals(300, 1), b = normals(500, 2, 1.2, 0.1);
  CHECK(ks_two_sample(a, a).statistic == 0.0);
  const std::vector<double> lo{1, 2, 3}, hi{4, 5, 6, 7};
  CHECK(ks_two_sample(lo, hi).statistic == 1.0);
  const TestReport ab = ks_two_sample(a, b), ba = ks_two_sample(b, a);
  CHECK(ab.statistic == ba.statistic);
  CHECK(ab.statistic == Approx(oracle::ks_distance(a, b)).epsilon(1e-15));
  std::vector<double> ea(a.size()), eb(b.size());
  std::transform(a.begin(), a.end(), ea.begin(), [](double x) { return std::exp(x); });
  std::transform(b.begin(), b.end(), eb.begin(), [](double x) { return std::exp(x); });
  CHECK(ks_two_sample(ea, eb).statistic == ab.statistic);
  const std::vector<double> ties_a{0, 0, 1, 1, 2}, ties_b{0, 1, 1, 1, 3, 3};
  CHECK(ks_two_sample(ties_a, ties_b).statistic == Approx(oracle::ks_distance(ties_a, ties_b)));
  CHECK_THROWS(ks_two_sample(std::vector<double>{}, a));
}

TEST_CASE("KS test is calibrated under the null") {
  int rejections = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const auto a = normals(400, 1000 + 2 * rep), b = normals(600, 1001 + 2 * rep);
    if (!ks_two_sample(a, b, 0.01).pass) ++rejections;
  }
  // P(Binomial(100, 0.01) > 5) < 1e-3.
  CHECK(rejections <= 5);
  const auto a = normals(2000, 5), b = normals(2000, 6, 1.0, 0.3);
  CHECK_FALSE(ks_two_sample(a, b, 0.01).pass);
}

TEST_CASE("conditional Gaussian draws") {
  const auto d = conditional_mixture_draws(2.5, -0.4, 200000, 3);
  const Moments mo = sample_moments(d);
  CHECK(std::abs(mo.mean + 0.4) <= 4.0 * mo.std_error);
  CHECK(mo.variance == Approx(2.5).epsilon(0.02));
  for (double v : conditional_mixture_draws(0.0, 1.5, 10, 3)) CHECK(v == 1.5);
  CHECK_THROWS(conditional_mixture_draws(-1.0, 0.0, 10, 3));
}

TEST_CASE("mixture limit sample") {
  MixtureSpec spec;
  spec.q = 2;
  spec.hurst = 0.3;
  spec.n_fine = 1024;
  spec.sigma = 1.3;
  const std::size_t m = 20000;
  const MixtureSample s = sample_mixture_limit(spec, m, 9);
  std::vector<double> std_values(m);
  for (std::size_t i = 0; i < m; ++i) {
    CHECK(s.conditional_variances[i] <= spec.sigma * spec.sigma + 1e-12);  // cos^2 <= 1
    CHECK(s.drift[i] == 0.0);
    std_values[i] = s.values[i] / std::sqrt(s.conditional_variances[i]);
  }
  const auto ref = normals(m, 77);
  CHECK(ks_two_sample(std_values, ref).pass);
  CHECK(conditional_cf_test(s.values, s.conditional_variances).pass);

  spec.with_drift = true;
  spec.hurst = 0.25;
  const MixtureSample d = sample_mixture_limit(spec, 2000, 9);
  const FbmSampler fine(FbmGrid{0.25, 1024});
  // Drift equals c_2 * mean of f''(B) = -(1/4) mean cos(B) on the fine grid.
  fine.for_each_path(stream_key(9, 0, StreamTag::mixture), 3,
                     [&](std::size_t i, std::span<const double> lv, std::span<const double>) {
                       double acc = 0.0;
                       for (std::size_t k = 0; k < 1024; ++k) acc += std::cos(lv[k]);
                       CHECK(d.drift[i] == Approx(-0.25 * acc / 1024.0).epsilon(1e-12));
                     });
  spec.n_fine = 512;
  CHECK_THROWS(sample_mixture_limit(spec, 10, 1));
}

TEST_CASE("conditional characteristic function test") {
  const std::size_t m = 50000;
  NormalStream z(4, 0, StreamTag::auxiliary);
  std::vector<double> s2(m), good(m), bad(m), zero_s2(m, 0.0), zeros(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    s2[i] = 0.2 + 2.0 * z.uniform();
    const double g = z();
    good[i] = std::sqrt(s2[i]) * g;
    bad[i] = std::sqrt(2.0 * s2[i]) * g;
  }
  CHECK(conditional_cf_test(good, s2).pass);
  CHECK_FALSE(conditional_cf_test(bad, s2).pass);
  const std::vector<double> lam0{0.0};
  CHECK(conditional_cf_test(good, s2, lam0).statistic == 0.0);
  CHECK(conditional_cf_test(zeros, zero_s2).statistic == 0.0);
  CHECK_THROWS(conditional_cf_test(good, std::span<const double>(s2).first(10)));
}

TEST_CASE("exact fourth moment of the quadratic variation") {
  const FourthMoment w = chaos2_fourth_moment_exact(0.5, 4);
  CHECK(w.normalized_m4 == Approx(6.0).epsilon(1e-14));
  CHECK(w.variance == Approx(2.0).epsilon(1e-14));
  const std::size_t big = 1 << 16;
  CHECK(chaos2_fourth_moment_exact(0.5, big).normalized_m4 == Approx(3.0 + 12.0 / big).epsilon(1e-12));

  for (double h : {0.2, 0.5, 0.7}) {
    for (std::size_t n = 2; n <= 6; ++n) {
      const FbmGrid grid{h, n};
      const auto space = GaussianSpace::create(increment_covariance(grid));
      const PolyRV one = PolyRV::constant(space, 1.0);
      const double nh = std::pow(static_cast<double>(n), h);
      PolyRV f(space);
      for (std::size_t k = 0; k < n; ++k)
        f += hermite_monic(2, PolyRV::gaussian(space, HilbertVec::basis(n, k)) * nh, one);
      f *= 1.0 / std::sqrt(static_cast<double>(n));
      const double v = wick_expectation(f * f);
      const double m4 = wick_expectation(f * f * f * f);
      const FourthMoment e = chaos2_fourth_moment_exact(h, n);
      CHECK(e.variance == Approx(v).epsilon(1e-10));
      CHECK(e.fourth_moment == Approx(m4).epsilon(1e-10));
      CHECK(e.normalized_m4 == Approx(m4 / (v * v)).epsilon(1e-10));
    }
  }

  double prev = 1e300;
  for (std::size_t n = 64; n <= (1 << 14); n *= 4) {
    const double m4 = chaos2_fourth_moment_exact(0.4, n).normalized_m4;
    CHECK(m4 > 3.0);
    CHECK(m4 < prev);
    prev = m4;
  }
  CHECK_THROWS_AS(chaos2_fourth_moment_exact(0.4, (1 << 16) + 1), std::domain_error);
}

TEST_CASE("fourth moment bound coefficient") {
  CHECK(fourth_moment_bound(2, 4.0) == Approx(std::sqrt(1.0 / 6.0)));
  CHECK(fourth_moment_bound(2, 3.0) == 0.0);
  CHECK(fourth_moment_bound(3, 7.0) == Approx(std::sqrt(2.0 / 9.0) * 2.0));
  CHECK_THROWS(fourth_moment_bound(1, 4.0));
}

TEST_CASE("Brownian example quantities") {
  for (std::size_t n : {1, 2, 5, 20, 100}) {
    const double nd = static_cast<double>(n);
    auto inner = [&](double t) {
      const double below = oracle::integrate([&](double s) { return std::pow(s, nd + 1.0); }, 0.0, t, 40);
      const double above = oracle::integrate([&](double s) { return std::pow(s, nd); }, t, 1.0, 40);
      return nd * std::pow(t, nd) * (below + t * above);
    };
    CHECK(brownian_condition_a(n) == Approx(oracle::integrate(inner, 0.0, 1.0, 200)).epsilon(1e-9));
  }
  CHECK(brownian_condition_a(100000) < 1e-4);

  BrownianExampleConfig c;
  c.n = 16;
  c.m = 20000;
  c.fine_steps = 512;
  c.seed = 3;
  const BrownianSample s = sample_brownian_example(c);
  std::vector<double> sq(c.m);
  for (std::size_t i = 0; i < c.m; ++i) sq[i] = s.f_n[i] * s.f_n[i];
  const Moments mo = sample_moments(sq);
  CHECK(std::abs(mo.mean - 16.0 / 34.0) <= 3.0 * mo.std_error);
  const Moments w = sample_moments(s.w1);
  CHECK(w.variance == Approx(1.0).epsilon(0.05));
}
