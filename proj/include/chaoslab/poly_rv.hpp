#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "chaoslab/gaussian_space.hpp"
#include "chaoslab/tensor.hpp"

namespace chaoslab {

/// Exponents of the orthonormal coordinates Z_1..Z_r.
using Monomial = std::vector<std::uint8_t>;

/// Polynomial in the orthonormal Gaussian coordinates of a GaussianSpace.
/// Coefficients below kPruneThreshold in absolute value are dropped.
class PolyRV {
 public:
  static constexpr double kPruneThreshold = 1e-14;
  static constexpr int kMaxDegree = 40;

  using Terms = std::map<Monomial, double>;

  explicit PolyRV(std::shared_ptr<const GaussianSpace> space);
  PolyRV(std::shared_ptr<const GaussianSpace> space, Terms terms);

  static PolyRV constant(std::shared_ptr<const GaussianSpace> space, double value);
  /// Z_j
  static PolyRV coordinate(std::shared_ptr<const GaussianSpace> space, std::size_t j);
  /// X(h) for h in the raw basis.
  static PolyRV gaussian(std::shared_ptr<const GaussianSpace> space, const HilbertVec& h);

  const GaussianSpace& space() const { return *space_; }
  const std::shared_ptr<const GaussianSpace>& space_ptr() const { return space_; }
  const Terms& terms() const { return terms_; }
  int degree() const { return degree_; }
  std::size_t coordinates() const { return space_->rank(); }

  double coefficient(const Monomial& m) const;
  bool is_zero(double tol = 0.0) const;
  double max_abs_coefficient() const;

  PolyRV partial(std::size_t j) const;
  PolyRV times_coordinate(std::size_t j) const;
  double evaluate(std::span<const double> z) const;
  /// p(F) for the univariate polynomial p with coefficients c_0, c_1, ...
  PolyRV compose(std::span<const double> coefficients) const;

  PolyRV& operator+=(const PolyRV& other);
  PolyRV& operator-=(const PolyRV& other);
  PolyRV& operator*=(double s);
  PolyRV& operator+=(double c);

  friend PolyRV operator+(PolyRV a, const PolyRV& b) { return a += b; }
  friend PolyRV operator-(PolyRV a, const PolyRV& b) { return a -= b; }
  friend PolyRV operator*(PolyRV a, double s) { return a *= s; }
  friend PolyRV operator*(double s, PolyRV a) { return a *= s; }
  friend PolyRV operator+(PolyRV a, double c) { return a += c; }
  friend PolyRV operator-(PolyRV a) { return a *= -1.0; }
  friend PolyRV operator*(const PolyRV& a, const PolyRV& b);

 private:
  void check_same_space(const PolyRV& other) const;
  void prune();

  std::shared_ptr<const GaussianSpace> space_;
  Terms terms_;
  int degree_ = 0;
};

double max_abs_diff(const PolyRV& a, const PolyRV& b);

enum class Basis { raw, orthonormal };

/// Order-q tensor with PolyRV entries: a random element of H^{(x)q}.
/// Dense storage over the raw basis (dimension d) or the orthonormal basis
/// (dimension r).
class RVTensor {
 public:
  RVTensor(std::shared_ptr<const GaussianSpace> space, int order, Basis basis);

  /// F * t for a deterministic tensor t given in `basis`.
  static RVTensor scaled(const PolyRV& f, const Tensor& t, Basis basis);

  const std::shared_ptr<const GaussianSpace>& space_ptr() const { return space_; }
  int order() const { return shape_.order(); }
  std::size_t dim() const { return shape_.dim(); }
  Basis basis() const { return basis_; }
  const IndexShape& shape() const { return shape_; }
  std::size_t size() const { return entries_.size(); }

  PolyRV& operator[](std::size_t flat) { return entries_[flat]; }
  const PolyRV& operator[](std::size_t flat) const { return entries_[flat]; }
  PolyRV& at(std::span<const std::size_t> idx) { return entries_[shape_.flat(idx)]; }
  const PolyRV& at(std::span<const std::size_t> idx) const { return entries_[shape_.flat(idx)]; }

  RVTensor to_orthonormal() const;
  RVTensor symmetrized() const;
  RVTensor permuted(std::span<const int> perm) const;
  bool is_symmetric(double tol = 1e-12) const;

  RVTensor& operator+=(const RVTensor& other);
  RVTensor& operator*=(double s);
  friend RVTensor operator+(RVTensor a, const RVTensor& b) { return a += b; }
  friend RVTensor operator*(double s, RVTensor a) { return a *= s; }

  double max_abs_diff(const RVTensor& other) const;

 private:
  std::shared_ptr<const GaussianSpace> space_;
  Basis basis_;
  IndexShape shape_;
  std::vector<PolyRV> entries_;
};

}  // namespace chaoslab
