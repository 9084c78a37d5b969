#include "chaoslab/hermite.hpp"

#include <cmath>

namespace chaoslab {

double factorial(int k) {
  if (k < 0) throw std::invalid_argument("factorial: negative argument");
  return std::tgamma(static_cast<double>(k) + 1.0);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

double double_factorial_odd(int m) {
  double r = 1.0;
  for (int k = 2 * m - 1; k > 1; k -= 2) r *= static_cast<double>(k);
  return r;
}

double hermite_eval(int q, double x, Normalization normalization) {
  const double he = hermite_monic(q, x, 1.0);
  return normalization == Normalization::monic ? he : he / factorial(q);
}

std::vector<double> hermite_monomial_coefficients(int q) {
  if (q < 0) throw std::invalid_argument("hermite: negative order");
  std::vector<double> prev{1.0};
  if (q == 0) return prev;
  std::vector<double> cur{0.0, 1.0};
  for (int k = 1; k < q; ++k) {
    std::vector<double> next(static_cast<std::size_t>(k) + 2, 0.0);
    for (std::size_t j = 0; j < cur.size(); ++j) next[j + 1] += cur[j];
    for (std::size_t j = 0; j < prev.size(); ++j) next[j] -= static_cast<double>(k) * prev[j];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

std::vector<double> monomial_hermite_coefficients(int m) {
  if (m < 0) throw std::invalid_argument("hermite: negative degree");
  // x^m = sum_j m! / (j! 2^j (m-2j)!) He_{m-2j}(x)
  std::vector<double> a(static_cast<std::size_t>(m) + 1, 0.0);
  for (int j = 0; 2 * j <= m; ++j) {
    a[static_cast<std::size_t>(m - 2 * j)] =
        factorial(m) / (factorial(j) * std::ldexp(1.0, j) * factorial(m - 2 * j));
  }
  return a;
}

}  // namespace chaoslab
