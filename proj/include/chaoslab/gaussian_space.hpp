#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <memory>

namespace chaoslab {

/// Element of the Hilbert space, written in the raw basis h_1..h_d.
struct HilbertVec {
  Eigen::VectorXd coeffs;

  static HilbertVec basis(std::size_t dim, std::size_t i);
  std::size_t size() const { return static_cast<std::size_t>(coeffs.size()); }
};

/// Finite-dimensional Gaussian model: X(h_i) for a raw basis with a given
/// Gram matrix. The model is represented by orthonormal coordinates
/// Z_1..Z_r with X(h_i) = sum_j factor(i, j) Z_j, where r is the numerical
/// rank of the Gram matrix (pivoted Cholesky).
class GaussianSpace {
 public:
  static constexpr std::size_t kMaxDimension = 64;

  explicit GaussianSpace(Eigen::MatrixXd gram);

  static std::shared_ptr<const GaussianSpace> create(Eigen::MatrixXd gram);
  static std::shared_ptr<const GaussianSpace> identity(std::size_t dim);

  std::size_t dimension() const { return static_cast<std::size_t>(gram_.rows()); }
  /// Number of orthonormal coordinates (rank of the Gram matrix).
  std::size_t rank() const { return static_cast<std::size_t>(factor_.cols()); }

  const Eigen::MatrixXd& gram() const { return gram_; }
  /// d x r matrix F with F F^T = gram.
  const Eigen::MatrixXd& factor() const { return factor_; }
  /// r x d matrix mapping raw coordinates to orthonormal coordinates.
  Eigen::MatrixXd onb_transform() const { return factor_.transpose(); }

  Eigen::VectorXd to_orthonormal(const HilbertVec& h) const;
  double inner_product(const HilbertVec& u, const HilbertVec& v) const;

 private:
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd factor_;
};

/// Pivoted Cholesky factor of a positive semidefinite matrix: returns F
/// (d x r) with F F^T = a, stopping once the largest remaining pivot drops
/// below rel_tol times the largest diagonal entry.
Eigen::MatrixXd pivoted_cholesky(const Eigen::MatrixXd& a, double rel_tol = 1e-12);

}  // namespace chaoslab
