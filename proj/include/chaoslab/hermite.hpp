#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace chaoslab {

/// Monic (probabilists') Hermite He_q, or He_q / q! as in the 1/q! convention.
enum class Normalization { monic, scaled };

double factorial(int k);
double binomial(int n, int k);
/// (2m-1)!! with the convention (-1)!! = 1.
double double_factorial_odd(int m);

/// He_q(x) by the three-term recurrence. Works for any ring-like T
/// constructible from a double (double, PolyRV).
template <class T>
T hermite_monic(int q, const T& x, const T& one) {
  if (q < 0) throw std::invalid_argument("hermite: negative order");
  if (q == 0) return one;
  T prev = one;
  T cur = x;
  for (int k = 1; k < q; ++k) {
    T next = x * cur - static_cast<double>(k) * prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

double hermite_eval(int q, double x, Normalization normalization = Normalization::monic);

/// Coefficients c_j of He_q(x) = sum_j c_j x^j.
std::vector<double> hermite_monomial_coefficients(int q);

/// Coefficients a_k of x^m = sum_k a_k He_k(x).
std::vector<double> monomial_hermite_coefficients(int m);

}  // namespace chaoslab
