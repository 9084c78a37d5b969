#include "chaoslab/malliavin.hpp"

#include <stdexcept>

#include "chaoslab/hermite.hpp"

namespace chaoslab {

namespace {

int monomial_degree(const Monomial& m) {
  int d = 0;
  for (auto e : m) d += e;
  return d;
}

void require_orthonormal(const RVTensor& u) {
  if (u.basis() != Basis::orthonormal) {
    throw std::invalid_argument("basis: divergence needs the orthonormal representation");
  }
}

}  // namespace

double wick_expectation(const PolyRV& f) {
  if (f.degree() > PolyRV::kMaxDegree) throw std::domain_error("degree cap: polynomial degree above 40");
  double acc = 0.0;
  for (const auto& [m, c] : f.terms()) {
    double v = c;
    for (auto e : m) {
      if (e % 2 != 0) {
        v = 0.0;
        break;
      }
      v *= double_factorial_odd(e / 2);
    }
    acc += v;
  }
  return acc;
}

RVTensor derivative(const RVTensor& u, int k) {
  if (k < 0) throw std::invalid_argument("derivative: negative order");
  if (k > 0 && u.basis() != Basis::orthonormal) return derivative(u.to_orthonormal(), k);
  RVTensor cur = u;
  const std::size_t r = u.space_ptr()->rank();
  for (int step = 0; step < k; ++step) {
    RVTensor next(cur.space_ptr(), cur.order() + 1, Basis::orthonormal);
    const std::size_t inner_size = cur.size();
    for (std::size_t j = 0; j < r; ++j) {
      for (std::size_t f = 0; f < inner_size; ++f) {
        if (cur[f].terms().empty()) continue;
        next[j * inner_size + f] = cur[f].partial(j);
      }
    }
    cur = std::move(next);
  }
  return cur;
}

RVTensor derivative(const PolyRV& f, int k) {
  RVTensor u(f.space_ptr(), 0, Basis::orthonormal);
  u[0] = f;
  return derivative(u, k);
}

RVTensor divergence(const RVTensor& u, int count) {
  require_orthonormal(u);
  if (count < 0 || count > u.order()) throw std::invalid_argument("divergence: slot count out of range");
  RVTensor cur = u;
  const std::size_t r = u.space_ptr()->rank();
  for (int step = 0; step < count; ++step) {
    RVTensor next(cur.space_ptr(), cur.order() - 1, Basis::orthonormal);
    for (std::size_t o = 0; o < next.size(); ++o) {
      PolyRV acc(cur.space_ptr());
      for (std::size_t j = 0; j < r; ++j) {
        const PolyRV& e = cur[o * r + j];
        if (e.terms().empty()) continue;
        acc += e.times_coordinate(j);
        acc -= e.partial(j);
      }
      next[o] = std::move(acc);
    }
    cur = std::move(next);
  }
  return cur;
}

PolyRV skorohod(const RVTensor& u) {
  if (u.order() < 1) throw std::invalid_argument("skorohod: order must be at least 1");
  return divergence(u, u.order())[0];
}

RVTensor pair_last(const RVTensor& u, const RVTensor& g) {
  require_orthonormal(u);
  require_orthonormal(g);
  if (g.order() > u.order()) throw std::invalid_argument("pairing: order out of range");
  RVTensor out(u.space_ptr(), u.order() - g.order(), Basis::orthonormal);
  const std::size_t inner_size = g.size();
  for (std::size_t o = 0; o < out.size(); ++o) {
    PolyRV acc(u.space_ptr());
    for (std::size_t c = 0; c < inner_size; ++c) {
      const PolyRV& a = u[o * inner_size + c];
      if (a.terms().empty() || g[c].terms().empty()) continue;
      acc += a * g[c];
    }
    out[o] = std::move(acc);
  }
  return out;
}

PolyRV full_pairing(const RVTensor& a, const RVTensor& b) {
  if (a.order() != b.order()) throw std::invalid_argument("pairing: order mismatch");
  return pair_last(a, b)[0];
}

IntegralResult multiple_integral(const Tensor& f, std::shared_ptr<const GaussianSpace> space) {
  IntegralResult result{PolyRV(space), false};
  const int q = f.order();
  if (q == 0) {
    result.value = PolyRV::constant(space, f.scalar_value());
    return result;
  }
  Tensor sym = f;
  if (!f.is_symmetric()) {
    sym = f.symmetrized();
    result.symmetrized = true;
  }
  const Tensor on = to_orthonormal(sym, *space);
  const std::size_t r = space->rank();
  HermiteExpansion h;
  Monomial m(r);
  for (std::size_t k = 0; k < on.shape().size(); ++k) {
    if (on[k] == 0.0) continue;
    std::fill(m.begin(), m.end(), 0);
    for (std::size_t i : on.shape().unflat(k)) m[i] += 1;
    h[m] += on[k];
  }
  result.value = from_hermite_expansion(h, std::move(space));
  return result;
}

HermiteExpansion hermite_expansion(const PolyRV& f) {
  const std::size_t r = f.coordinates();
  HermiteExpansion out;
  for (const auto& [m, c] : f.terms()) {
    HermiteExpansion partial;
    partial.emplace(Monomial(r, 0), c);
    for (std::size_t j = 0; j < r; ++j) {
      if (m[j] == 0) continue;
      const std::vector<double> a = monomial_hermite_coefficients(m[j]);
      HermiteExpansion next;
      for (const auto& [key, v] : partial) {
        for (std::size_t k = 0; k < a.size(); ++k) {
          if (a[k] == 0.0) continue;
          Monomial kk = key;
          kk[j] = static_cast<std::uint8_t>(k);
          next[kk] += v * a[k];
        }
      }
      partial = std::move(next);
    }
    for (const auto& [key, v] : partial) out[key] += v;
  }
  for (auto it = out.begin(); it != out.end();) {
    it = std::abs(it->second) < PolyRV::kPruneThreshold ? out.erase(it) : std::next(it);
  }
  return out;
}

PolyRV from_hermite_expansion(const HermiteExpansion& h, std::shared_ptr<const GaussianSpace> space) {
  const std::size_t r = space->rank();
  PolyRV::Terms terms;
  for (const auto& [key, c] : h) {
    PolyRV::Terms partial;
    partial.emplace(Monomial(r, 0), c);
    for (std::size_t j = 0; j < r; ++j) {
      if (key[j] == 0) continue;
      const std::vector<double> a = hermite_monomial_coefficients(key[j]);
      PolyRV::Terms next;
      for (const auto& [mono, v] : partial) {
        for (std::size_t k = 0; k < a.size(); ++k) {
          if (a[k] == 0.0) continue;
          Monomial mm = mono;
          mm[j] = static_cast<std::uint8_t>(k);
          next[mm] += v * a[k];
        }
      }
      partial = std::move(next);
    }
    for (const auto& [mono, v] : partial) terms[mono] += v;
  }
  return PolyRV(std::move(space), std::move(terms));
}

PolyRV chaos_projection(const PolyRV& f, int q) {
  HermiteExpansion h = hermite_expansion(f);
  for (auto it = h.begin(); it != h.end();) {
    it = monomial_degree(it->first) == q ? std::next(it) : h.erase(it);
  }
  return from_hermite_expansion(h, f.space_ptr());
}

PolyRV ou_generator(const PolyRV& f) {
  if (f.terms().empty()) return f;
  return -skorohod(derivative(f, 1));
}

PolyRV ou_generator_chaos(const PolyRV& f) {
  HermiteExpansion h = hermite_expansion(f);
  for (auto& [key, c] : h) c *= -static_cast<double>(monomial_degree(key));
  return from_hermite_expansion(h, f.space_ptr());
}

}  // namespace chaoslab
