#pragma once

#include <map>

#include "chaoslab/poly_rv.hpp"
#include "chaoslab/tensor.hpp"

namespace chaoslab {

/// Exact E[F] by Isserlis pairings of the orthonormal coordinates.
double wick_expectation(const PolyRV& f);

/// D^k F in the orthonormal basis (order k).
RVTensor derivative(const PolyRV& f, int k);
/// D^k u; the k new slots come first, followed by the slots of u.
RVTensor derivative(const RVTensor& u, int k);

/// Applies delta to the last `count` slots of u, one slot at a time.
RVTensor divergence(const RVTensor& u, int count = 1);
/// delta^q(u) for an order-q tensor in the orthonormal basis.
PolyRV skorohod(const RVTensor& u);

/// <u, g> over the last g.order() slots of u (orthonormal basis).
RVTensor pair_last(const RVTensor& u, const RVTensor& g);
/// Full pairing sum_idx a[idx] b[idx] as a random variable.
PolyRV full_pairing(const RVTensor& a, const RVTensor& b);

struct IntegralResult {
  PolyRV value;
  bool symmetrized = false;
};

/// I_q(f) for f given in the raw basis; asymmetric f is symmetrized and
/// flagged.
IntegralResult multiple_integral(const Tensor& f, std::shared_ptr<const GaussianSpace> space);

/// Coefficients in the product Hermite basis: key m means prod_j He_{m_j}(Z_j).
using HermiteExpansion = std::map<Monomial, double>;

HermiteExpansion hermite_expansion(const PolyRV& f);
PolyRV from_hermite_expansion(const HermiteExpansion& h, std::shared_ptr<const GaussianSpace> space);
/// J_q F
PolyRV chaos_projection(const PolyRV& f, int q);

/// LF = -delta(DF).
PolyRV ou_generator(const PolyRV& f);
/// LF = -sum_q q J_q F.
PolyRV ou_generator_chaos(const PolyRV& f);

}  // namespace chaoslab
