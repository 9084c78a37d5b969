#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaoslab/fbm.hpp"
#include "chaoslab/hermite.hpp"

namespace chaoslab {

/// Weight f with closed-form derivatives: polynomial, a cos(b x), or
/// exp(-c x^2).
class WeightFunction {
 public:
  enum class Kind { polynomial, cosine, exp_neg_quadratic };
  static constexpr int kMaxDerivative = 12;

  static WeightFunction polynomial(std::vector<double> coefficients);
  static WeightFunction constant(double value) { return polynomial({value}); }
  static WeightFunction cosine(double a, double b);
  static WeightFunction exp_neg_quadratic(double c);
  /// "poly:c0,c1,...", "cos:a,b" or "expq:c".
  static WeightFunction parse(const std::string& spec);

  Kind kind() const { return kind_; }
  std::string to_string() const;
  const std::vector<double>& params() const { return params_; }

  double operator()(double x) const { return derivative(0, x); }
  /// f^{(order)}(x); throws for orders above kMaxDerivative.
  double derivative(int order, double x) const;
  /// Coefficients of f^{(order)} (polynomial kind only).
  std::vector<double> derivative_coefficients(int order) const;
  /// True when f^{(order)} vanishes identically.
  bool derivative_is_zero(int order) const;

 private:
  WeightFunction(Kind kind, std::vector<double> params) : kind_(kind), params_(std::move(params)) {}
  void check_order(int order) const;

  Kind kind_;
  std::vector<double> params_;
};

enum class Regime { lower, critical_lower, mixed_clt, critical_upper, hermite };

std::string to_string(Regime regime);

struct RegimeSpec {
  int q = 2;
  double hurst = 0.5;
  Regime regime = Regime::mixed_clt;
  double lower_threshold = 0.25;   // 1/(2q)
  double upper_threshold = 0.75;   // 1 - 1/(2q)
  std::string scaling;             // renormalization applied to G_n
  std::string limit;               // predicted limit

  /// Factor multiplying G_n (or the corrected G_n) at resolution n.
  double renormalization(std::size_t n) const;
  /// Whether the renormalized statistic subtracts the correction term.
  bool uses_correction() const { return regime == Regime::mixed_clt; }
};

/// Boundaries are matched within 1e-12.
RegimeSpec classify_regime(int q, double hurst);

struct SigmaResult {
  double sigma = 0.0;
  double sigma_sq = 0.0;
  std::size_t terms = 0;        // lags summed explicitly
  double tail_estimate = 0.0;   // asymptotic tail added beyond the cap
};

/// sigma_{H,q}^2 = q! sum_r rho(r)^q, truncated so the tail bound is below tol.
SigmaResult sigma_hq(double hurst, int q, double tol = 1e-12);

/// c_q in the correction term: (-1)^q / 2^q, divided by q! when scaled.
double correction_constant(int q, Normalization normalization);

/// delta^p(g(B_a) del^{(x)p}) = sum_j C(p,j) (-alpha)^j g^{(j)}(B_a) |del|^{p-j} He_{p-j}(dB/|del|).
/// g_deriv(j, level) returns g^{(j)}(level); works for double and PolyRV.
template <class T, class Deriv>
T skorohod_closed_form(const T& level, const T& increment, double alpha, double del_norm, int p,
                       Deriv&& g_deriv, const T& one) {
  if (p < 0) throw std::invalid_argument("closed form: negative order");
  if (!(del_norm > 0.0)) throw std::invalid_argument("closed form: increment norm must be positive");
  const T x = increment * (1.0 / del_norm);
  T acc = one * 0.0;
  double alpha_pow = 1.0;
  for (int j = 0; j <= p; ++j) {
    const double w = binomial(p, j) * alpha_pow * std::pow(del_norm, p - j);
    if (w != 0.0) acc = acc + g_deriv(j, level) * hermite_monic(p - j, x, one) * w;
    alpha_pow *= -alpha;
  }
  return acc;
}

/// delta^{q-r}(f^{(r)}(B_a) del^{(x)(q-r)}) for a weight function.
double skorohod_weighted_closed_form(double level, double increment, double alpha, double del_norm, int q,
                                     const WeightFunction& f, int r);

/// Per-path statistics at one resolution.
struct PathVariation {
  double g_n = 0.0;
  double correction = 0.0;
  double renormalized = 0.0;
  double main = 0.0;
  std::vector<double> middle;  // r = 1..q-1
  double remainder = 0.0;
  double residual = 0.0;
};

/// Evaluates G_n and its companions on single paths of a fixed grid.
class VariationEvaluator {
 public:
  VariationEvaluator(const FbmGrid& grid, int q, WeightFunction f, Normalization normalization);

  const FbmGrid& grid() const { return grid_; }
  int q() const { return q_; }
  const RegimeSpec& regime() const { return regime_; }
  Normalization normalization() const { return normalization_; }
  const WeightFunction& weight() const { return f_; }
  double alpha_diag(std::size_t k) const { return alpha_diag_[k]; }

  double g_n(std::span<const double> levels, std::span<const double> increments) const;
  double correction(std::span<const double> levels) const;
  PathVariation evaluate(std::span<const double> levels, std::span<const double> increments,
                         bool decompose) const;

 private:
  FbmGrid grid_;
  int q_;
  WeightFunction f_;
  Normalization normalization_;
  RegimeSpec regime_;
  double scale_;      // n^{qH - 1/2}, divided by q! when scaled
  double del_norm_;   // n^{-H}
  std::vector<double> alpha_diag_;
};

struct VariationResult {
  int q = 2;
  double hurst = 0.5;
  std::size_t n = 0;
  Normalization normalization = Normalization::monic;
  std::uint64_t seed = 0;
  RegimeSpec regime;
  std::vector<double> g_n;
  std::vector<double> correction;
  std::vector<double> renormalized;
  bool decomposed = false;
  std::vector<double> main_term;
  std::vector<std::vector<double>> middle;  // middle[r - 1][path]
  std::vector<double> remainder;
  std::vector<double> residual;
};

VariationResult weighted_variation(const FbmPathBatch& batch, int q, const WeightFunction& f,
                                   Normalization normalization = Normalization::monic, bool decompose = false);
/// Same statistics with paths streamed from a sampler.
VariationResult weighted_variation(const FbmSampler& sampler, std::uint64_t seed, std::size_t m, int q,
                                   const WeightFunction& f, Normalization normalization = Normalization::monic,
                                   bool decompose = false);

std::vector<double> correction_term(const FbmPathBatch& batch, int q, const WeightFunction& f,
                                    Normalization normalization = Normalization::monic);
VariationResult decompose_gn(const FbmPathBatch& batch, int q, const WeightFunction& f,
                             Normalization normalization = Normalization::monic);

/// A_n = (q!/n) sum_{l,j} rho(l - j)^q f(B_l) f(B_j), lags cut where |rho|^q < 1e-14.
class AnStatistic {
 public:
  AnStatistic(const FbmGrid& grid, int q);
  ~AnStatistic();
  AnStatistic(const AnStatistic&) = delete;
  AnStatistic& operator=(const AnStatistic&) = delete;

  std::size_t lag_cutoff() const { return cutoff_; }
  double operator()(std::span<const double> weights) const;

 private:
  struct Fft;
  FbmGrid grid_;
  int q_;
  std::size_t cutoff_;
  std::vector<double> kernel_;  // q! rho(r)^q, r = 0..cutoff
  std::unique_ptr<Fft> fft_;
};

std::vector<double> a_n_statistic(const FbmPathBatch& batch, int q, const WeightFunction& f);

}  // namespace chaoslab
