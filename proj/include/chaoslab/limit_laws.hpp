#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chaoslab/fbm.hpp"
#include "chaoslab/variations.hpp"
#include "json.hpp"

namespace chaoslab {

/// Outcome of one statistical or exact check. pass == (statistic <= threshold).
struct TestReport {
  std::string name;
  std::vector<std::size_t> sample_sizes;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::vector<std::uint64_t> seeds;
  double runtime_seconds = 0.0;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();

  void set_verdict() { pass = statistic <= threshold; }
  /// Runtime goes to a separate meta block when include_meta is set.
  nlohmann::ordered_json to_json(bool include_meta = true) const;
};

/// Law of drift + sigma_{H,q} sqrt(int f(B)^2) N, with N independent of B.
struct MixtureSpec {
  int q = 2;
  double hurst = 0.3;
  WeightFunction f = WeightFunction::cosine(1.0, 1.0);
  std::size_t n_fine = 4096;
  double sigma = 0.0;
  /// Adds c_q int f^{(q)}(B_s) ds (critical case).
  bool with_drift = false;
  Normalization normalization = Normalization::monic;
  std::optional<SamplingMethod> method;
};

struct MixtureSample {
  std::vector<double> values;
  std::vector<double> conditional_variances;  // S^2
  std::vector<double> drift;                  // zero unless with_drift
};

MixtureSample sample_mixture_limit(const MixtureSpec& spec, std::size_t m, std::uint64_t seed);

/// drift + sqrt(s2) Z for m fresh standard normals Z (fixed conditioning path).
std::vector<double> conditional_mixture_draws(double s2, double drift, std::size_t m, std::uint64_t seed);

/// Asymptotic Kolmogorov tail P(K > x), series truncated at 100 terms.
double kolmogorov_tail(double x);
/// x with kolmogorov_tail(x) = alpha.
double kolmogorov_quantile(double alpha);

/// Two-sample KS test at the 1% level.
TestReport ks_two_sample(std::span<const double> a, std::span<const double> b, double alpha = 0.01);

/// Paired comparison of E[exp(i lambda F) Z] with E[exp(i lambda mu - lambda^2 S^2 / 2) Z] for
/// Z in {1, S^2, min(S^2, 1), exp(-S^2)}. drift holds mu (empty: zero).
TestReport conditional_cf_test(std::span<const double> values, std::span<const double> s2,
                               std::span<const double> lambdas = std::span<const double>(),
                               std::span<const double> drift = std::span<const double>(),
                               double threshold = 4.0);

struct FourthMoment {
  double variance = 0.0;       // Var(n^{-1/2} sum He_2)
  double fourth_moment = 0.0;  // E[(n^{-1/2} sum He_2)^4]
  double normalized_m4 = 0.0;  // E[F_n^4] with F_n standardized
};

/// Exact moments of n^{-1/2} sum_k He_2(n^H dB_k), n <= 2^16.
FourthMoment chaos2_fourth_moment_exact(double hurst, std::size_t n);

/// sqrt((q - 1) / (3q)) sqrt(|m4 - 3|)
double fourth_moment_bound(int q, double normalized_m4);

TestReport berry_esseen_check(double hurst, std::size_t n, std::size_t m, std::uint64_t seed,
                              std::optional<SamplingMethod> method = std::nullopt);

struct BrownianExampleConfig {
  std::size_t n = 512;
  std::size_t m = 100000;
  std::uint64_t seed = 1;
  std::size_t fine_steps = 2048;  // grid on [t0, 1]
};

/// Exact <g_n (x)_1 g_n, 1 (x) 1> = 2n / ((n + 2)(2n + 3)).
double brownian_condition_a(std::size_t n);

struct BrownianSample {
  std::vector<double> f_n;
  std::vector<double> u_dot_df;
  std::vector<double> w1;
};

BrownianSample sample_brownian_example(const BrownianExampleConfig& config);
/// Independent draws of W_1 Z / sqrt(2).
std::vector<double> brownian_limit_sample(std::size_t m, std::uint64_t seed);

TestReport brownian_example_run(const BrownianExampleConfig& config);

}  // namespace chaoslab
