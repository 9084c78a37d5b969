#include "chaoslab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "chaoslab/hermite.hpp"

namespace chaoslab {

namespace {

constexpr std::size_t kMaxDenseSize = std::size_t{1} << 26;

}  // namespace

IndexShape::IndexShape(std::size_t dim, int order) : dim_(dim), order_(order), size_(1) {
  if (order < 0) throw std::invalid_argument("tensor: negative order");
  if (order > Tensor::kMaxOrder) throw std::domain_error("order cap: tensors are limited to order 6");
  for (int s = 0; s < order; ++s) {
    size_ *= dim;
    if (size_ > kMaxDenseSize) throw std::domain_error("order cap: dense tensor too large");
  }
}

std::size_t IndexShape::flat(std::span<const std::size_t> idx) const {
  if (idx.size() != static_cast<std::size_t>(order_)) throw std::invalid_argument("tensor: index length mismatch");
  std::size_t f = 0;
  for (std::size_t i : idx) {
    if (i >= dim_) throw std::out_of_range("tensor: index out of range");
    f = f * dim_ + i;
  }
  return f;
}

MultiIndex IndexShape::unflat(std::size_t flat) const {
  MultiIndex idx(static_cast<std::size_t>(order_));
  for (int s = order_ - 1; s >= 0; --s) {
    idx[static_cast<std::size_t>(s)] = flat % dim_;
    flat /= dim_;
  }
  return idx;
}

std::size_t IndexShape::sorted_flat(std::size_t flat) const {
  MultiIndex idx = unflat(flat);
  std::sort(idx.begin(), idx.end());
  return this->flat(idx);
}

Tensor::Tensor(std::size_t dim, int order) : shape_(dim, order), data_(shape_.size(), 0.0) {}

Tensor Tensor::scalar(double value) {
  Tensor t(1, 0);
  t.data_[0] = value;
  return t;
}

Tensor Tensor::from_vector(const Eigen::VectorXd& v) {
  Tensor t(static_cast<std::size_t>(v.size()), 1);
  for (Eigen::Index i = 0; i < v.size(); ++i) t.data_[static_cast<std::size_t>(i)] = v(i);
  return t;
}

Tensor Tensor::product_of(std::span<const Eigen::VectorXd> vectors) {
  if (vectors.empty()) return scalar(1.0);
  Tensor t = from_vector(vectors.front());
  for (std::size_t k = 1; k < vectors.size(); ++k) t = tensor_product(t, from_vector(vectors[k]));
  return t;
}

double Tensor::scalar_value() const {
  if (order() != 0) throw std::logic_error("tensor: scalar_value on a tensor of positive order");
  return data_[0];
}

bool Tensor::is_symmetric(double tol) const {
  for (std::size_t f = 0; f < data_.size(); ++f) {
    if (std::abs(data_[f] - data_[shape_.sorted_flat(f)]) > tol) return false;
  }
  return true;
}

Tensor Tensor::symmetrized() const {
  const int q = order();
  if (q <= 1) return *this;
  std::vector<int> perm(static_cast<std::size_t>(q));
  std::iota(perm.begin(), perm.end(), 0);
  Tensor acc(dim(), q);
  double count = 0.0;
  do {
    acc += permuted(perm);
    count += 1.0;
  } while (std::next_permutation(perm.begin(), perm.end()));
  acc *= 1.0 / count;
  return acc;
}

Tensor Tensor::permuted(std::span<const int> perm) const {
  const int q = order();
  if (perm.size() != static_cast<std::size_t>(q)) throw std::invalid_argument("tensor: permutation length mismatch");
  Tensor out(dim(), q);
  MultiIndex src(static_cast<std::size_t>(q));
  for (std::size_t f = 0; f < data_.size(); ++f) {
    const MultiIndex idx = shape_.unflat(f);
    for (int s = 0; s < q; ++s) src[static_cast<std::size_t>(perm[static_cast<std::size_t>(s)])] = idx[static_cast<std::size_t>(s)];
    out.data_[f] = data_[shape_.flat(src)];
  }
  return out;
}

Tensor Tensor::transformed(const Eigen::MatrixXd& m) const {
  if (static_cast<std::size_t>(m.rows()) != dim()) throw std::invalid_argument("dimension: transform does not match tensor");
  const std::size_t new_dim = static_cast<std::size_t>(m.cols());
  const int q = order();
  // Mode-by-mode product; slot s is transformed while others are carried.
  std::vector<double> cur = data_;
  std::vector<std::size_t> dims(static_cast<std::size_t>(q), dim());
  for (int s = 0; s < q; ++s) {
    std::size_t outer = 1, inner_size = 1;
    for (int t = 0; t < s; ++t) outer *= dims[static_cast<std::size_t>(t)];
    for (int t = s + 1; t < q; ++t) inner_size *= dims[static_cast<std::size_t>(t)];
    const std::size_t old_d = dims[static_cast<std::size_t>(s)];
    std::vector<double> next(outer * new_dim * inner_size, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < old_d; ++i) {
        const double* src = &cur[(o * old_d + i) * inner_size];
        for (std::size_t j = 0; j < new_dim; ++j) {
          const double w = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          if (w == 0.0) continue;
          double* dst = &next[(o * new_dim + j) * inner_size];
          for (std::size_t k = 0; k < inner_size; ++k) dst[k] += w * src[k];
        }
      }
    }
    cur = std::move(next);
    dims[static_cast<std::size_t>(s)] = new_dim;
  }
  Tensor out(new_dim, q);
  out.data_ = std::move(cur);
  return out;
}

double Tensor::max_abs_diff(const Tensor& other) const {
  if (other.dim() != dim() || other.order() != order()) throw std::invalid_argument("tensor: shape mismatch");
  double m = 0.0;
  for (std::size_t f = 0; f < data_.size(); ++f) m = std::max(m, std::abs(data_[f] - other.data_[f]));
  return m;
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (other.dim() != dim() || other.order() != order()) throw std::invalid_argument("tensor: shape mismatch");
  for (std::size_t f = 0; f < data_.size(); ++f) data_[f] += other.data_[f];
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator*(double s, Tensor a) { return a *= s; }

Tensor tensor_product(const Tensor& f, const Tensor& g) {
  if (f.order() == 0) return f.scalar_value() * g;
  if (g.order() == 0) return g.scalar_value() * f;
  if (f.dim() != g.dim()) throw std::invalid_argument("space mismatch: tensors over different dimensions");
  Tensor out(f.dim(), f.order() + g.order());
  const std::size_t gs = g.data().size();
  for (std::size_t a = 0; a < f.data().size(); ++a) {
    for (std::size_t b = 0; b < gs; ++b) out[a * gs + b] = f[a] * g[b];
  }
  return out;
}

Tensor contract(const Tensor& f, const Tensor& g, int r, const Eigen::MatrixXd& gram, bool symmetrize) {
  const int p = f.order();
  const int q = g.order();
  if (r < 0 || r > std::min(p, q)) throw std::invalid_argument("contraction: r out of range");
  if (r == 0) {
    Tensor t = tensor_product(f, g);
    return symmetrize ? t.symmetrized() : t;
  }
  if (f.dim() != g.dim() || static_cast<std::size_t>(gram.rows()) != f.dim()) {
    throw std::invalid_argument("space mismatch: tensors and Gram matrix disagree");
  }
  const std::size_t d = f.dim();
  // Pull g's last r slots through the Gram matrix, then pair Euclidean-wise.
  Tensor gg = g;
  {
    // apply gram on the last r slots of g only
    std::vector<double> cur(g.data().begin(), g.data().end());
    for (int s = q - r; s < q; ++s) {
      std::size_t outer = 1, inner_size = 1;
      for (int t = 0; t < s; ++t) outer *= d;
      for (int t = s + 1; t < q; ++t) inner_size *= d;
      std::vector<double> next(cur.size(), 0.0);
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < d; ++i) {
          const double* src = &cur[(o * d + i) * inner_size];
          for (std::size_t j = 0; j < d; ++j) {
            const double w = gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (w == 0.0) continue;
            double* dst = &next[(o * d + j) * inner_size];
            for (std::size_t k = 0; k < inner_size; ++k) dst[k] += w * src[k];
          }
        }
      }
      cur = std::move(next);
    }
    for (std::size_t k = 0; k < cur.size(); ++k) gg[k] = cur[k];
  }
  std::size_t paired = 1;
  for (int s = 0; s < r; ++s) paired *= d;
  const std::size_t f_free = f.data().size() / paired;
  const std::size_t g_free = g.data().size() / paired;
  const int out_order = p + q - 2 * r;
  Tensor out = out_order == 0 ? Tensor::scalar(0.0) : Tensor(d, out_order);
  for (std::size_t a = 0; a < f_free; ++a) {
    for (std::size_t b = 0; b < g_free; ++b) {
      double acc = 0.0;
      for (std::size_t c = 0; c < paired; ++c) acc += f[a * paired + c] * gg[b * paired + c];
      out[a * g_free + b] = acc;
    }
  }
  return symmetrize ? out.symmetrized() : out;
}

double inner(const Tensor& f, const Tensor& g, const Eigen::MatrixXd& gram) {
  if (f.order() != g.order()) throw std::invalid_argument("inner: order mismatch");
  if (f.order() == 0) return f.scalar_value() * g.scalar_value();
  return contract(f, g, f.order(), gram).scalar_value();
}

Tensor to_orthonormal(const Tensor& raw, const GaussianSpace& space) {
  if (raw.order() == 0) return raw;
  if (raw.dim() != space.dimension()) throw std::invalid_argument("dimension: tensor does not match the space");
  return raw.transformed(space.factor());
}

SymTensor::SymTensor(std::size_t dim, int order) : dim_(dim), order_(order) {
  if (order < 0) throw std::invalid_argument("tensor: negative order");
  if (order > Tensor::kMaxOrder) throw std::domain_error("order cap: tensors are limited to order 6");
  data_.assign(static_cast<std::size_t>(binomial(static_cast<int>(dim) + order - 1, order)), 0.0);
  if (order == 0) data_.assign(1, 0.0);
}

std::size_t SymTensor::packed_index(std::span<const std::size_t> idx) const {
  if (idx.size() != static_cast<std::size_t>(order_)) throw std::invalid_argument("tensor: index length mismatch");
  MultiIndex s(idx.begin(), idx.end());
  std::sort(s.begin(), s.end());
  std::size_t rank = 0;
  std::size_t prev = 0;
  const int d = static_cast<int>(dim_);
  for (int pos = 0; pos < order_; ++pos) {
    const std::size_t v_end = s[static_cast<std::size_t>(pos)];
    if (v_end >= dim_) throw std::out_of_range("tensor: index out of range");
    const int remaining = order_ - pos - 1;
    for (std::size_t v = prev; v < v_end; ++v) {
      rank += static_cast<std::size_t>(binomial(d - static_cast<int>(v) + remaining - 1, remaining));
    }
    prev = v_end;
  }
  return rank;
}

SymTensor SymTensor::from_tensor(const Tensor& t, double tol) {
  if (!t.is_symmetric(tol)) throw std::invalid_argument("tensor: input is not symmetric");
  SymTensor s(t.dim(), t.order());
  for (std::size_t f = 0; f < t.data().size(); ++f) {
    const MultiIndex idx = t.shape().unflat(f);
    if (std::is_sorted(idx.begin(), idx.end())) s.data_[s.packed_index(idx)] = t[f];
  }
  return s;
}

Tensor SymTensor::to_tensor() const {
  Tensor t(dim_, order_);
  if (order_ == 0) return Tensor::scalar(data_[0]);
  for (std::size_t f = 0; f < t.data().size(); ++f) t[f] = data_[packed_index(t.shape().unflat(f))];
  return t;
}

}  // namespace chaoslab
