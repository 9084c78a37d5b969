#include "chaoslab/poly_rv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace chaoslab {

namespace {

int total_degree(const Monomial& m) {
  int d = 0;
  for (auto e : m) d += e;
  return d;
}

}  // namespace

PolyRV::PolyRV(std::shared_ptr<const GaussianSpace> space) : space_(std::move(space)) {
  if (!space_) throw std::invalid_argument("PolyRV: null space");
}

PolyRV::PolyRV(std::shared_ptr<const GaussianSpace> space, Terms terms)
    : space_(std::move(space)), terms_(std::move(terms)) {
  if (!space_) throw std::invalid_argument("PolyRV: null space");
  for (const auto& [m, c] : terms_) {
    if (m.size() != space_->rank()) throw std::invalid_argument("dimension: monomial length mismatch");
    (void)c;
  }
  prune();
}

PolyRV PolyRV::constant(std::shared_ptr<const GaussianSpace> space, double value) {
  const std::size_t r = space->rank();
  Terms t;
  t.emplace(Monomial(r, 0), value);
  return PolyRV(std::move(space), std::move(t));
}

PolyRV PolyRV::coordinate(std::shared_ptr<const GaussianSpace> space, std::size_t j) {
  const std::size_t r = space->rank();
  if (j >= r) throw std::invalid_argument("dimension: coordinate index out of range");
  Monomial m(r, 0);
  m[j] = 1;
  Terms t;
  t.emplace(std::move(m), 1.0);
  return PolyRV(std::move(space), std::move(t));
}

PolyRV PolyRV::gaussian(std::shared_ptr<const GaussianSpace> space, const HilbertVec& h) {
  const Eigen::VectorXd on = space->to_orthonormal(h);
  const std::size_t r = space->rank();
  Terms t;
  for (std::size_t j = 0; j < r; ++j) {
    Monomial m(r, 0);
    m[j] = 1;
    t.emplace(std::move(m), on(static_cast<Eigen::Index>(j)));
  }
  return PolyRV(std::move(space), std::move(t));
}

double PolyRV::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

bool PolyRV::is_zero(double tol) const { return max_abs_coefficient() <= tol; }

double PolyRV::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

void PolyRV::prune() {
  degree_ = 0;
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) < kPruneThreshold) {
      it = terms_.erase(it);
    } else {
      degree_ = std::max(degree_, total_degree(it->first));
      ++it;
    }
  }
}

void PolyRV::check_same_space(const PolyRV& other) const {
  if (space_ != other.space_) throw std::invalid_argument("space mismatch: random variables over different spaces");
}

PolyRV PolyRV::partial(std::size_t j) const {
  if (j >= coordinates()) throw std::invalid_argument("dimension: coordinate index out of range");
  Terms out;
  for (const auto& [m, c] : terms_) {
    if (m[j] == 0) continue;
    Monomial mm = m;
    mm[j] -= 1;
    out[mm] += c * static_cast<double>(m[j]);
  }
  return PolyRV(space_, std::move(out));
}

PolyRV PolyRV::times_coordinate(std::size_t j) const {
  if (j >= coordinates()) throw std::invalid_argument("dimension: coordinate index out of range");
  if (degree_ + 1 > kMaxDegree) throw std::domain_error("degree cap: polynomial degree above 40");
  Terms out;
  for (const auto& [m, c] : terms_) {
    Monomial mm = m;
    mm[j] += 1;
    out.emplace_hint(out.end(), std::move(mm), c);
  }
  return PolyRV(space_, std::move(out));
}

double PolyRV::evaluate(std::span<const double> z) const {
  if (z.size() != coordinates()) throw std::invalid_argument("dimension: evaluation point length mismatch");
  double acc = 0.0;
  for (const auto& [m, c] : terms_) {
    double v = c;
    for (std::size_t j = 0; j < m.size(); ++j) {
      for (int e = 0; e < m[j]; ++e) v *= z[j];
    }
    acc += v;
  }
  return acc;
}

PolyRV PolyRV::compose(std::span<const double> coefficients) const {
  PolyRV acc(space_);
  for (std::size_t k = coefficients.size(); k-- > 0;) {
    acc = acc * *this;
    acc += coefficients[k];
  }
  return acc;
}

PolyRV& PolyRV::operator+=(const PolyRV& other) {
  check_same_space(other);
  for (const auto& [m, c] : other.terms_) terms_[m] += c;
  prune();
  return *this;
}

PolyRV& PolyRV::operator-=(const PolyRV& other) {
  check_same_space(other);
  for (const auto& [m, c] : other.terms_) terms_[m] -= c;
  prune();
  return *this;
}

PolyRV& PolyRV::operator*=(double s) {
  for (auto& [m, c] : terms_) c *= s;
  prune();
  return *this;
}

PolyRV& PolyRV::operator+=(double c) {
  terms_[Monomial(coordinates(), 0)] += c;
  prune();
  return *this;
}

PolyRV operator*(const PolyRV& a, const PolyRV& b) {
  a.check_same_space(b);
  if (a.degree() + b.degree() > PolyRV::kMaxDegree) throw std::domain_error("degree cap: polynomial degree above 40");
  PolyRV::Terms out;
  const std::size_t r = a.coordinates();
  Monomial mm(r);
  for (const auto& [ma, ca] : a.terms()) {
    for (const auto& [mb, cb] : b.terms()) {
      for (std::size_t j = 0; j < r; ++j) mm[j] = static_cast<std::uint8_t>(ma[j] + mb[j]);
      out[mm] += ca * cb;
    }
  }
  return PolyRV(a.space_ptr(), std::move(out));
}

double max_abs_diff(const PolyRV& a, const PolyRV& b) { return (a - b).max_abs_coefficient(); }

RVTensor::RVTensor(std::shared_ptr<const GaussianSpace> space, int order, Basis basis)
    : space_(std::move(space)),
      basis_(basis),
      shape_(basis == Basis::raw ? space_->dimension() : space_->rank(), order),
      entries_(shape_.size(), PolyRV(space_)) {}

RVTensor RVTensor::scaled(const PolyRV& f, const Tensor& t, Basis basis) {
  RVTensor out(f.space_ptr(), t.order(), basis);
  if (t.order() > 0 && t.dim() != out.dim()) throw std::invalid_argument("dimension: tensor does not match the basis");
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (t[k] != 0.0) out.entries_[k] = f * t[k];
  }
  return out;
}

RVTensor RVTensor::to_orthonormal() const {
  if (basis_ == Basis::orthonormal) return *this;
  const Eigen::MatrixXd& a = space_->factor();
  const std::size_t d = space_->dimension();
  const std::size_t r = space_->rank();
  const int q = order();
  std::vector<PolyRV> cur = entries_;
  std::vector<std::size_t> dims(static_cast<std::size_t>(q), d);
  for (int s = 0; s < q; ++s) {
    std::size_t outer = 1, inner_size = 1;
    for (int t = 0; t < s; ++t) outer *= dims[static_cast<std::size_t>(t)];
    for (int t = s + 1; t < q; ++t) inner_size *= dims[static_cast<std::size_t>(t)];
    std::vector<PolyRV> next(outer * r * inner_size, PolyRV(space_));
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < r; ++j) {
          const double w = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          if (w == 0.0) continue;
          for (std::size_t k = 0; k < inner_size; ++k) {
            const PolyRV& src = cur[(o * d + i) * inner_size + k];
            if (src.terms().empty()) continue;
            next[(o * r + j) * inner_size + k] += w * src;
          }
        }
      }
    }
    cur = std::move(next);
    dims[static_cast<std::size_t>(s)] = r;
  }
  RVTensor out(space_, q, Basis::orthonormal);
  out.entries_ = std::move(cur);
  return out;
}

RVTensor RVTensor::permuted(std::span<const int> perm) const {
  const int q = order();
  if (perm.size() != static_cast<std::size_t>(q)) throw std::invalid_argument("tensor: permutation length mismatch");
  RVTensor out(space_, q, basis_);
  MultiIndex src(static_cast<std::size_t>(q));
  for (std::size_t f = 0; f < entries_.size(); ++f) {
    const MultiIndex idx = shape_.unflat(f);
    for (int s = 0; s < q; ++s) src[static_cast<std::size_t>(perm[static_cast<std::size_t>(s)])] = idx[static_cast<std::size_t>(s)];
    out.entries_[f] = entries_[shape_.flat(src)];
  }
  return out;
}

RVTensor RVTensor::symmetrized() const {
  const int q = order();
  if (q <= 1) return *this;
  std::vector<int> perm(static_cast<std::size_t>(q));
  std::iota(perm.begin(), perm.end(), 0);
  RVTensor acc(space_, q, basis_);
  double count = 0.0;
  do {
    acc += permuted(perm);
    count += 1.0;
  } while (std::next_permutation(perm.begin(), perm.end()));
  acc *= 1.0 / count;
  return acc;
}

bool RVTensor::is_symmetric(double tol) const {
  for (std::size_t f = 0; f < entries_.size(); ++f) {
    if (chaoslab::max_abs_diff(entries_[f], entries_[shape_.sorted_flat(f)]) > tol) return false;
  }
  return true;
}

RVTensor& RVTensor::operator+=(const RVTensor& other) {
  if (other.space_ != space_ || other.basis_ != basis_ || other.order() != order()) {
    throw std::invalid_argument("space mismatch: tensors over different spaces or bases");
  }
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += other.entries_[k];
  return *this;
}

RVTensor& RVTensor::operator*=(double s) {
  for (auto& e : entries_) e *= s;
  return *this;
}

double RVTensor::max_abs_diff(const RVTensor& other) const {
  if (other.space_ != space_ || other.basis_ != basis_ || other.order() != order()) {
    throw std::invalid_argument("space mismatch: tensors over different spaces or bases");
  }
  double m = 0.0;
  for (std::size_t k = 0; k < entries_.size(); ++k) m = std::max(m, chaoslab::max_abs_diff(entries_[k], other.entries_[k]));
  return m;
}

}  // namespace chaoslab
