#include "chaoslab/gaussian_space.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace chaoslab {

HilbertVec HilbertVec::basis(std::size_t dim, std::size_t i) {
  if (i >= dim) throw std::invalid_argument("dimension: basis index out of range");
  HilbertVec h{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))};
  h.coeffs(static_cast<Eigen::Index>(i)) = 1.0;
  return h;
}

Eigen::MatrixXd pivoted_cholesky(const Eigen::MatrixXd& a, double rel_tol) {
  const Eigen::Index d = a.rows();
  Eigen::MatrixXd work = a;
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
  const double scale = d > 0 ? a.diagonal().cwiseAbs().maxCoeff() : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < d; ++k) {
    Eigen::Index piv = k;
    for (Eigen::Index i = k + 1; i < d; ++i) {
      if (work(perm[i], perm[i]) > work(perm[piv], perm[piv])) piv = i;
    }
    const double pivot = work(perm[piv], perm[piv]);
    if (!(pivot > rel_tol * scale) || pivot <= 0.0) break;
    std::swap(perm[k], perm[piv]);
    const Eigen::Index p = perm[k];
    const double root = std::sqrt(pivot);
    l(p, k) = root;
    for (Eigen::Index i = k + 1; i < d; ++i) {
      const Eigen::Index row = perm[i];
      l(row, k) = work(row, p) / root;
    }
    for (Eigen::Index i = k + 1; i < d; ++i) {
      const Eigen::Index ri = perm[i];
      for (Eigen::Index j = k + 1; j < d; ++j) {
        const Eigen::Index rj = perm[j];
        work(ri, rj) -= l(ri, k) * l(rj, k);
      }
    }
    ++rank;
  }
  return l.leftCols(rank);
}

GaussianSpace::GaussianSpace(Eigen::MatrixXd gram) : gram_(std::move(gram)) {
  const Eigen::Index d = gram_.rows();
  if (d == 0 || gram_.cols() != d) throw std::invalid_argument("dimension: gram must be square and non-empty");
  if (static_cast<std::size_t>(d) > kMaxDimension) {
    throw std::invalid_argument("dimension: at most 64 basis vectors are supported");
  }
  const double asym = (gram_ - gram_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) throw std::invalid_argument("gram: not symmetric (deviation " + std::to_string(asym) + ")");
  gram_ = 0.5 * (gram_ + gram_.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_, Eigen::EigenvaluesOnly);
  const double max_ev = eig.eigenvalues().maxCoeff();
  const double min_ev = eig.eigenvalues().minCoeff();
  if (min_ev < -1e-10 * std::max(max_ev, 0.0)) {
    throw std::invalid_argument("gram: not positive semidefinite (eigenvalue " + std::to_string(min_ev) + ")");
  }
  factor_ = pivoted_cholesky(gram_);
  if (factor_.cols() == 0) throw std::invalid_argument("gram: zero matrix");
}

std::shared_ptr<const GaussianSpace> GaussianSpace::create(Eigen::MatrixXd gram) {
  return std::make_shared<const GaussianSpace>(std::move(gram));
}

std::shared_ptr<const GaussianSpace> GaussianSpace::identity(std::size_t dim) {
  return create(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

Eigen::VectorXd GaussianSpace::to_orthonormal(const HilbertVec& h) const {
  if (h.size() != dimension()) throw std::invalid_argument("dimension: vector does not match the space");
  return factor_.transpose() * h.coeffs;
}

double GaussianSpace::inner_product(const HilbertVec& u, const HilbertVec& v) const {
  if (u.size() != dimension() || v.size() != dimension()) {
    throw std::invalid_argument("dimension: vector does not match the space");
  }
  return u.coeffs.dot(gram_ * v.coeffs);
}

}  // namespace chaoslab
