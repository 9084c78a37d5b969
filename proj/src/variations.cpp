#include "chaoslab/variations.hpp"

#include <fftw3.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "chaoslab/parallel.hpp"

namespace chaoslab {

namespace {

constexpr double kBoundaryTol = 1e-12;
constexpr std::size_t kMaxSigmaLags = std::size_t{1} << 24;
constexpr double kLagCutoff = 1e-14;
constexpr std::size_t kDirectBand = 32;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("weight: cannot parse number '" + item + "'");
    }
    if (used != item.size()) throw std::invalid_argument("weight: cannot parse number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::mutex& fft_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

WeightFunction WeightFunction::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) coefficients.push_back(0.0);
  return WeightFunction(Kind::polynomial, std::move(coefficients));
}

WeightFunction WeightFunction::cosine(double a, double b) { return WeightFunction(Kind::cosine, {a, b}); }

WeightFunction WeightFunction::exp_neg_quadratic(double c) {
  if (c < 0.0) throw std::invalid_argument("weight: expq needs c >= 0");
  return WeightFunction(Kind::exp_neg_quadratic, {c});
}

WeightFunction WeightFunction::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("weight: expected kind:params, got '" + spec + "'");
  const std::string kind = spec.substr(0, colon);
  const std::vector<double> p = parse_list(spec.substr(colon + 1));
  if (kind == "poly") {
    if (p.empty()) throw std::invalid_argument("weight: poly needs at least one coefficient");
    return polynomial(p);
  }
  if (kind == "cos") {
    if (p.size() != 2) throw std::invalid_argument("weight: cos needs a,b");
    return cosine(p[0], p[1]);
  }
  if (kind == "expq") {
    if (p.size() != 1) throw std::invalid_argument("weight: expq needs c");
    return exp_neg_quadratic(p[0]);
  }
  throw std::invalid_argument("weight: unknown kind '" + kind + "'");
}

std::string WeightFunction::to_string() const {
  std::string out = kind_ == Kind::polynomial ? "poly:" : kind_ == Kind::cosine ? "cos:" : "expq:";
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (i) out += ',';
    out += format_double(params_[i]);
  }
  return out;
}

void WeightFunction::check_order(int order) const {
  if (order < 0 || order > kMaxDerivative) {
    throw std::out_of_range("weight: derivative order " + std::to_string(order) + " unavailable");
  }
}

std::vector<double> WeightFunction::derivative_coefficients(int order) const {
  check_order(order);
  if (kind_ != Kind::polynomial) throw std::logic_error("weight: coefficients exist for polynomial weights only");
  std::vector<double> c = params_;
  for (int k = 0; k < order; ++k) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> d(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * static_cast<double>(i);
    c = std::move(d);
  }
  return c;
}

bool WeightFunction::derivative_is_zero(int order) const {
  check_order(order);
  switch (kind_) {
    case Kind::polynomial: {
      const auto c = derivative_coefficients(order);
      return std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
    }
    case Kind::cosine:
      return params_[0] == 0.0 || (order > 0 && params_[1] == 0.0);
    case Kind::exp_neg_quadratic:
      return order > 0 && params_[0] == 0.0;
  }
  return false;
}

double WeightFunction::derivative(int order, double x) const {
  check_order(order);
  switch (kind_) {
    case Kind::polynomial: {
      const auto c = derivative_coefficients(order);
      double acc = 0.0;
      for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
      return acc;
    }
    case Kind::cosine: {
      const double a = params_[0], b = params_[1];
      const double phase = b * x;
      // cos(phase + order pi / 2) without rounding pi / 2.
      double v = 0.0;
      switch (order % 4) {
        case 0: v = std::cos(phase); break;
        case 1: v = -std::sin(phase); break;
        case 2: v = -std::cos(phase); break;
        default: v = std::sin(phase); break;
      }
      return a * std::pow(b, order) * v;
    }
    case Kind::exp_neg_quadratic: {
      const double c = params_[0];
      const double s = std::sqrt(2.0 * c);
      const double sign = order % 2 == 0 ? 1.0 : -1.0;
      return std::pow(s, order) * sign * hermite_eval(order, x * s) * std::exp(-c * x * x);
    }
  }
  return 0.0;
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::lower: return "lower";
    case Regime::critical_lower: return "critical_lower";
    case Regime::mixed_clt: return "mixed_clt";
    case Regime::critical_upper: return "critical_upper";
    case Regime::hermite: return "hermite";
  }
  return "unknown";
}

double RegimeSpec::renormalization(std::size_t n) const {
  const double nn = static_cast<double>(n);
  switch (regime) {
    case Regime::lower: return std::pow(nn, q * hurst - 0.5);
    case Regime::critical_lower:
    case Regime::mixed_clt: return 1.0;
    case Regime::critical_upper:
      if (n < 2) throw std::domain_error("critical_upper scaling needs n >= 2");
      return 1.0 / std::sqrt(std::log(nn));
    case Regime::hermite: return std::pow(nn, q * (1.0 - hurst) - 0.5);
  }
  return 1.0;
}

RegimeSpec classify_regime(int q, double hurst) {
  if (q < 2) throw std::invalid_argument("regime: q must be at least 2");
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("regime: Hurst index must lie in (0, 1)");
  RegimeSpec s;
  s.q = q;
  s.hurst = hurst;
  s.lower_threshold = 1.0 / (2.0 * q);
  s.upper_threshold = 1.0 - 1.0 / (2.0 * q);
  if (std::abs(hurst - s.lower_threshold) <= kBoundaryTol) {
    s.regime = Regime::critical_lower;
    s.scaling = "1";
    s.limit = "c_q int f^(q)(B_s) ds + sigma_{H,q} int f(B_s) dW_s";
  } else if (hurst < s.lower_threshold) {
    s.regime = Regime::lower;
    s.scaling = "n^(qH-1/2)";
    s.limit = "c_q int f^(q)(B_s) ds (in L2)";
  } else if (std::abs(hurst - s.upper_threshold) <= kBoundaryTol) {
    s.regime = Regime::critical_upper;
    s.scaling = "1/sqrt(log n)";
    s.limit = "sqrt(2/q!) (1-1/(2q))^(q/2) (1-1/q)^(q/2) int f(B_s) dW_s";
  } else if (hurst < s.upper_threshold) {
    s.regime = Regime::mixed_clt;
    s.scaling = "1 (corrected)";
    s.limit = "sigma_{H,q} int f(B_s) dW_s";
  } else {
    s.regime = Regime::hermite;
    s.scaling = "n^(q(1-H)-1/2)";
    s.limit = "int f(B_s) dZ^(q)_s (variance boundedness only)";
  }
  return s;
}

SigmaResult sigma_hq(double hurst, int q, double tol) {
  if (q < 1) throw std::invalid_argument("sigma: q must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("sigma: tol must be positive");
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("sigma: Hurst index must lie in (0, 1)");
  if (hurst >= 1.0 - 1.0 / (2.0 * q) - kBoundaryTol) {
    throw std::domain_error("divergent series: sum of rho^q diverges for H >= 1 - 1/(2q)");
  }
  const double qf = factorial(q);
  const double lead = hurst * (2.0 * hurst - 1.0);  // rho(r) ~ lead r^{2H-2}
  const double s = q * (2.0 - 2.0 * hurst);
  SigmaResult out;
  std::size_t lags = 1;
  bool capped = false;
  if (lead != 0.0) {
    const double c = 2.0 * std::pow(std::abs(lead), q);
    const double want = std::pow(2.0 * qf * c / ((s - 1.0) * tol), 1.0 / (s - 1.0));
    if (!(want < static_cast<double>(kMaxSigmaLags))) {
      lags = kMaxSigmaLags;
      capped = true;
    } else {
      lags = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(want)));
    }
  }
  long double acc = 0.0L;
  for (std::size_t r = lags; r >= 1; --r) acc += std::pow(static_cast<long double>(rho(hurst, static_cast<long long>(r))), q);
  if (capped) {
    const double mid = static_cast<double>(lags) + 0.5;
    out.tail_estimate = std::pow(lead, q) * std::pow(mid, 1.0 - s) / (s - 1.0);
    acc += out.tail_estimate;
  }
  out.terms = lags;
  out.sigma_sq = static_cast<double>(qf * (1.0L + 2.0L * acc));
  if (!(out.sigma_sq > 0.0)) throw std::domain_error("sigma: non-positive variance constant");
  out.sigma = std::sqrt(out.sigma_sq);
  return out;
}

double correction_constant(int q, Normalization normalization) {
  const double c = (q % 2 == 0 ? 1.0 : -1.0) / std::pow(2.0, q);
  return normalization == Normalization::monic ? c : c / factorial(q);
}

double skorohod_weighted_closed_form(double level, double increment, double alpha, double del_norm, int q,
                                     const WeightFunction& f, int r) {
  if (r < 0 || r > q) throw std::invalid_argument("closed form: r out of range");
  return skorohod_closed_form<double>(
      level, increment, alpha, del_norm, q - r, [&](int j, double x) { return f.derivative(r + j, x); }, 1.0);
}

VariationEvaluator::VariationEvaluator(const FbmGrid& grid, int q, WeightFunction f, Normalization normalization)
    : grid_(grid), q_(q), f_(std::move(f)), normalization_(normalization) {
  grid_.validate();
  if (q < 1) throw std::invalid_argument("variation: q must be positive");
  if (q > WeightFunction::kMaxDerivative) throw std::domain_error("order cap: q above the derivative cap");
  regime_ = q >= 2 ? classify_regime(q, grid_.hurst) : RegimeSpec{1, grid_.hurst, Regime::mixed_clt, 0.5, 0.5, "1", "-"};
  const double nn = static_cast<double>(grid_.n);
  scale_ = std::pow(nn, q * grid_.hurst - 0.5);
  if (normalization_ == Normalization::scaled) scale_ /= factorial(q);
  del_norm_ = std::pow(nn, -grid_.hurst);
  alpha_diag_.resize(grid_.n);
  for (std::size_t k = 0; k < grid_.n; ++k) alpha_diag_[k] = grid_alpha(grid_.hurst, grid_.n, k, k);
}

double VariationEvaluator::g_n(std::span<const double> levels, std::span<const double> increments) const {
  const std::size_t n = grid_.n;
  if (levels.size() != n + 1 || increments.size() != n) throw std::invalid_argument("dimension: path length mismatch");
  const double nh = std::pow(static_cast<double>(n), grid_.hurst);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += f_(levels[k]) * hermite_eval(q_, nh * increments[k]);
  acc /= std::sqrt(static_cast<double>(n));
  return normalization_ == Normalization::scaled ? acc / factorial(q_) : acc;
}

double VariationEvaluator::correction(std::span<const double> levels) const {
  const std::size_t n = grid_.n;
  if (levels.size() != n + 1) throw std::invalid_argument("dimension: path length mismatch");
  if (f_.derivative_is_zero(q_)) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += f_.derivative(q_, levels[k]);
  return correction_constant(q_, normalization_) * std::pow(static_cast<double>(n), -0.5 - q_ * grid_.hurst) * acc;
}

PathVariation VariationEvaluator::evaluate(std::span<const double> levels, std::span<const double> increments,
                                           bool decompose) const {
  PathVariation out;
  out.g_n = g_n(levels, increments);
  out.correction = correction(levels);
  const double base = regime_.uses_correction() ? out.g_n - out.correction : out.g_n;
  out.renormalized = regime_.renormalization(grid_.n) * base;
  if (!decompose) return out;
  std::vector<double> sums(static_cast<std::size_t>(q_) + 1, 0.0);
  for (std::size_t k = 0; k < grid_.n; ++k) {
    const double a = alpha_diag_[k];
    double a_pow = 1.0;
    for (int r = 0; r <= q_; ++r) {
      if (a_pow != 0.0) {
        sums[static_cast<std::size_t>(r)] +=
            binomial(q_, r) * a_pow *
            skorohod_weighted_closed_form(levels[k], increments[k], a, del_norm_, q_, f_, r);
      }
      a_pow *= a;
    }
  }
  out.main = scale_ * sums[0];
  out.middle.resize(static_cast<std::size_t>(std::max(q_ - 1, 0)));
  double total = out.main;
  for (int r = 1; r < q_; ++r) {
    out.middle[static_cast<std::size_t>(r - 1)] = scale_ * sums[static_cast<std::size_t>(r)];
    total += out.middle[static_cast<std::size_t>(r - 1)];
  }
  out.remainder = q_ >= 1 ? scale_ * sums[static_cast<std::size_t>(q_)] : 0.0;
  total += out.remainder;
  out.residual = out.g_n - total;
  return out;
}

namespace {

VariationResult make_result(const VariationEvaluator& ev, std::size_t m, std::uint64_t seed, bool decompose) {
  VariationResult r;
  r.q = ev.q();
  r.hurst = ev.grid().hurst;
  r.n = ev.grid().n;
  r.normalization = ev.normalization();
  r.seed = seed;
  r.regime = ev.regime();
  r.g_n.assign(m, 0.0);
  r.correction.assign(m, 0.0);
  r.renormalized.assign(m, 0.0);
  r.decomposed = decompose;
  if (decompose) {
    r.main_term.assign(m, 0.0);
    r.middle.assign(static_cast<std::size_t>(std::max(ev.q() - 1, 0)), std::vector<double>(m, 0.0));
    r.remainder.assign(m, 0.0);
    r.residual.assign(m, 0.0);
  }
  return r;
}

void store(VariationResult& r, std::size_t i, const PathVariation& p) {
  r.g_n[i] = p.g_n;
  r.correction[i] = p.correction;
  r.renormalized[i] = p.renormalized;
  if (!r.decomposed) return;
  r.main_term[i] = p.main;
  for (std::size_t k = 0; k < p.middle.size(); ++k) r.middle[k][i] = p.middle[k];
  r.remainder[i] = p.remainder;
  r.residual[i] = p.residual;
}

}  // namespace

VariationResult weighted_variation(const FbmPathBatch& batch, int q, const WeightFunction& f,
                                   Normalization normalization, bool decompose) {
  VariationEvaluator ev(batch.grid, q, f, normalization);
  VariationResult r = make_result(ev, batch.m, batch.seed, decompose);
  parallel_for(batch.m, [&](std::size_t i) {
    store(r, i, ev.evaluate(batch.path_levels(i), batch.path_increments(i), decompose));
  });
  return r;
}

VariationResult weighted_variation(const FbmSampler& sampler, std::uint64_t seed, std::size_t m, int q,
                                   const WeightFunction& f, Normalization normalization, bool decompose) {
  VariationEvaluator ev(sampler.grid(), q, f, normalization);
  VariationResult r = make_result(ev, m, seed, decompose);
  sampler.for_each_path(seed, m, [&](std::size_t i, std::span<const double> levels, std::span<const double> inc) {
    store(r, i, ev.evaluate(levels, inc, decompose));
  });
  return r;
}

std::vector<double> correction_term(const FbmPathBatch& batch, int q, const WeightFunction& f,
                                    Normalization normalization) {
  VariationEvaluator ev(batch.grid, q, f, normalization);
  std::vector<double> out(batch.m);
  parallel_for(batch.m, [&](std::size_t i) { out[i] = ev.correction(batch.path_levels(i)); });
  return out;
}

VariationResult decompose_gn(const FbmPathBatch& batch, int q, const WeightFunction& f, Normalization normalization) {
  return weighted_variation(batch, q, f, normalization, true);
}

struct AnStatistic::Fft {
  std::size_t size = 0;
  std::vector<double> spectrum;  // real spectrum of the circulant kernel
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~Fft() {
    std::lock_guard lock(fft_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

AnStatistic::AnStatistic(const FbmGrid& grid, int q) : grid_(grid), q_(q) {
  grid_.validate();
  if (q < 1) throw std::invalid_argument("A_n: q must be positive");
  const std::size_t n = grid_.n;
  const double qf = factorial(q);
  kernel_.push_back(qf);
  cutoff_ = 0;
  for (std::size_t r = 1; r < n; ++r) {
    const double v = std::pow(rho(grid_.hurst, static_cast<long long>(r)), q);
    if (std::abs(v) < kLagCutoff) {
      // |rho| decreases in the lag, so the remaining terms are below the cutoff too.
      break;
    }
    kernel_.push_back(qf * v);
    cutoff_ = r;
  }
  if (cutoff_ <= kDirectBand) return;
  fft_ = std::make_unique<Fft>();
  const std::size_t size = 2 * n;
  fft_->size = size;
  double* buf = fftw_alloc_real(size);
  fftw_complex* spec = fftw_alloc_complex(size / 2 + 1);
  {
    std::lock_guard lock(fft_mutex());
    fft_->forward = fftw_plan_dft_r2c_1d(static_cast<int>(size), buf, spec, FFTW_ESTIMATE);
    fft_->backward = fftw_plan_dft_c2r_1d(static_cast<int>(size), spec, buf, FFTW_ESTIMATE);
  }
  std::fill(buf, buf + size, 0.0);
  for (std::size_t r = 0; r <= cutoff_; ++r) {
    buf[r] = kernel_[r];
    if (r > 0) buf[size - r] = kernel_[r];
  }
  fftw_execute_dft_r2c(fft_->forward, buf, spec);
  fft_->spectrum.resize(size / 2 + 1);
  for (std::size_t k = 0; k <= size / 2; ++k) fft_->spectrum[k] = spec[k][0];
  fftw_free(buf);
  fftw_free(spec);
}

AnStatistic::~AnStatistic() = default;

double AnStatistic::operator()(std::span<const double> w) const {
  const std::size_t n = grid_.n;
  if (w.size() != n) throw std::invalid_argument("dimension: A_n needs one weight per grid point");
  double quad = 0.0;
  if (!fft_) {
    for (std::size_t l = 0; l < n; ++l) {
      double row = kernel_[0] * w[l];
      const std::size_t hi = std::min(n - 1, l + cutoff_);
      for (std::size_t j = l + 1; j <= hi; ++j) row += 2.0 * kernel_[j - l] * w[j];
      quad += w[l] * row;
    }
    return quad / static_cast<double>(n);
  }
  const std::size_t size = fft_->size;
  double* buf = fftw_alloc_real(size);
  fftw_complex* spec = fftw_alloc_complex(size / 2 + 1);
  std::copy(w.begin(), w.end(), buf);
  std::fill(buf + n, buf + size, 0.0);
  fftw_execute_dft_r2c(fft_->forward, buf, spec);
  for (std::size_t k = 0; k <= size / 2; ++k) {
    spec[k][0] *= fft_->spectrum[k];
    spec[k][1] *= fft_->spectrum[k];
  }
  fftw_execute_dft_c2r(fft_->backward, spec, buf);
  for (std::size_t l = 0; l < n; ++l) quad += w[l] * buf[l];
  fftw_free(buf);
  fftw_free(spec);
  return quad / static_cast<double>(size) / static_cast<double>(n);
}

std::vector<double> a_n_statistic(const FbmPathBatch& batch, int q, const WeightFunction& f) {
  AnStatistic a(batch.grid, q);
  std::vector<double> out(batch.m);
  parallel_for(batch.m, [&](std::size_t i) {
    const auto levels = batch.path_levels(i);
    std::vector<double> w(batch.grid.n);
    for (std::size_t k = 0; k < batch.grid.n; ++k) w[k] = f(levels[k]);
    out[i] = a(w);
  });
  return out;
}

}  // namespace chaoslab
