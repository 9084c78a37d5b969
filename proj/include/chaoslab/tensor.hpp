#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "chaoslab/gaussian_space.hpp"

namespace chaoslab {

using MultiIndex = std::vector<std::size_t>;

/// Row-major index arithmetic for order-q tensors over a d-dimensional basis.
class IndexShape {
 public:
  IndexShape(std::size_t dim, int order);

  std::size_t dim() const { return dim_; }
  int order() const { return order_; }
  std::size_t size() const { return size_; }

  std::size_t flat(std::span<const std::size_t> idx) const;
  MultiIndex unflat(std::size_t flat) const;
  /// Flat index of the non-decreasing rearrangement of `flat`.
  std::size_t sorted_flat(std::size_t flat) const;

 private:
  std::size_t dim_;
  int order_;
  std::size_t size_;
};

/// Deterministic tensor h_{i1} (x) ... (x) h_{iq} coefficients in a basis
/// (raw or orthonormal, as tracked by the caller). Dense storage.
class Tensor {
 public:
  static constexpr int kMaxOrder = 6;

  Tensor(std::size_t dim, int order);

  static Tensor scalar(double value);
  static Tensor from_vector(const Eigen::VectorXd& v);
  /// v_1 (x) ... (x) v_k
  static Tensor product_of(std::span<const Eigen::VectorXd> vectors);

  std::size_t dim() const { return shape_.dim(); }
  int order() const { return shape_.order(); }
  const IndexShape& shape() const { return shape_; }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }
  double& at(std::span<const std::size_t> idx) { return data_[shape_.flat(idx)]; }
  double at(std::span<const std::size_t> idx) const { return data_[shape_.flat(idx)]; }
  std::span<const double> data() const { return data_; }
  double scalar_value() const;

  bool is_symmetric(double tol = 1e-12) const;
  Tensor symmetrized() const;
  /// Result slot s carries the original slot perm[s].
  Tensor permuted(std::span<const int> perm) const;
  /// Coefficients after mapping every slot through the matrix m (rows:
  /// old basis, cols: new basis): out[j..] = sum_i in[i..] prod m(i_s, j_s).
  Tensor transformed(const Eigen::MatrixXd& m) const;

  double max_abs_diff(const Tensor& other) const;

  Tensor& operator+=(const Tensor& other);
  Tensor& operator*=(double s);

 private:
  IndexShape shape_;
  std::vector<double> data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator*(double s, Tensor a);
Tensor tensor_product(const Tensor& f, const Tensor& g);

/// r-th contraction: pairs the last r slots of f with the last r slots of g
/// through the Gram matrix. r = 0 is the tensor product; r = p = q gives an
/// order-0 tensor holding <f, g>.
Tensor contract(const Tensor& f, const Tensor& g, int r, const Eigen::MatrixXd& gram,
                bool symmetrize = false);

double inner(const Tensor& f, const Tensor& g, const Eigen::MatrixXd& gram);

/// Raw-basis tensor rewritten in the orthonormal coordinates of the space.
Tensor to_orthonormal(const Tensor& raw, const GaussianSpace& space);

/// Symmetric tensor stored once per non-decreasing multi-index; the flat
/// size is C(d+q-1, q).
class SymTensor {
 public:
  SymTensor(std::size_t dim, int order);

  /// Throws if `t` is not symmetric within tol.
  static SymTensor from_tensor(const Tensor& t, double tol = 1e-12);
  Tensor to_tensor() const;

  std::size_t dim() const { return dim_; }
  int order() const { return order_; }
  std::size_t flat_size() const { return data_.size(); }

  /// Rank of a multi-index (any order of its entries) in the packed storage.
  std::size_t packed_index(std::span<const std::size_t> idx) const;
  double get(std::span<const std::size_t> idx) const { return data_[packed_index(idx)]; }
  void set(std::span<const std::size_t> idx, double v) { data_[packed_index(idx)] = v; }
  std::span<const double> packed() const { return data_; }

 private:
  std::size_t dim_;
  int order_;
  std::vector<double> data_;
};

}  // namespace chaoslab
