#include <cmath>
#include <stdexcept>
#include <string>

#include "chaoslab/gaussian_space.hpp"
#include "chaoslab/hermite.hpp"
#include "chaoslab/malliavin.hpp"
#include "chaoslab/poly_rv.hpp"
#include "chaoslab/tensor.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace chaoslab;
using doctest::Approx;

namespace {

std::shared_ptr<const GaussianSpace> corr_space(double r) {
  Eigen::MatrixXd g(2, 2);
  g << 1.0, r, r, 1.0;
  return GaussianSpace::create(g);
}

bool throws_with(const std::function<void()>& f, const std::string& needle) {
  try {
    f();
  } catch (const std::exception& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

Tensor unit_tensor(std::size_t d, std::initializer_list<std::size_t> idx) {
  Tensor t(d, static_cast<int>(idx.size()));
  std::vector<std::size_t> v(idx);
  t.at(v) = 1.0;
  return t;
}

}  // namespace

TEST_CASE("inner product reads the gram matrix") {
  auto id = GaussianSpace::identity(2);
  CHECK(id->inner_product(HilbertVec::basis(2, 0), HilbertVec::basis(2, 0)) == 1.0);
  CHECK(id->inner_product(HilbertVec::basis(2, 0), HilbertVec::basis(2, 1)) == 0.0);
  auto s = corr_space(0.5);
  CHECK(s->inner_product(HilbertVec::basis(2, 0), HilbertVec::basis(2, 1)) == Approx(0.5));
  CHECK(throws_with([&] { s->inner_product(HilbertVec::basis(3, 0), HilbertVec::basis(2, 1)); }, "dimension"));
}

TEST_CASE("gram validation and orthonormal factor") {
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.2, 0.3, 1.0;
  CHECK_THROWS_AS(GaussianSpace::create(asym), std::invalid_argument);
  Eigen::MatrixXd neg(2, 2);
  neg << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(GaussianSpace::create(neg), std::invalid_argument);
  CHECK(throws_with([] { GaussianSpace::identity(65); }, "dimension"));

  Eigen::MatrixXd a(3, 2);
  a << 1.0, 0.0, 0.5, 1.0, 1.5, 1.0;  // rank 2 gram over 3 vectors
  auto s = GaussianSpace::create(a * a.transpose());
  CHECK(s->rank() == 2);
  CHECK((s->factor() * s->factor().transpose() - s->gram()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("hermite polynomials") {
  CHECK(hermite_eval(2, 3.0) == Approx(8.0));
  CHECK(hermite_eval(3, 2.0) == Approx(2.0));
  CHECK(hermite_eval(3, 2.0, Normalization::scaled) == Approx(1.0 / 3.0));
  CHECK_THROWS(hermite_eval(-1, 1.0));
  for (int q = 0; q <= 10; ++q) {
    for (double x : {-4.5, -1.3, 0.0, 0.7, 3.2}) {
      CHECK(hermite_eval(q, x) == Approx(oracle::hermite(q, x)).epsilon(1e-12).scale(1.0));
    }
  }
  const double h = 1e-6;
  for (int q = 1; q <= 6; ++q) {
    for (double x = -5.0; x <= 5.0; x += 0.25) {
      const double fd = (hermite_eval(q, x + h) - hermite_eval(q, x - h)) / (2 * h);
      CHECK(std::abs(fd - q * hermite_eval(q - 1, x)) <= 1e-5);
    }
  }
}

TEST_CASE("contractions") {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
  const Tensor f = unit_tensor(2, {0, 1});
  const Tensor c1 = contract(f, f, 1, id);
  CHECK(c1.order() == 2);
  CHECK(c1.max_abs_diff(unit_tensor(2, {0, 0})) == 0.0);
  const Tensor c2 = contract(f, f, 2, id);
  CHECK(c2.scalar_value() == Approx(1.0));
  const Tensor c0 = contract(f, unit_tensor(2, {1}), 0, id);
  CHECK(c0.order() == 3);
  CHECK(c0.max_abs_diff(tensor_product(f, unit_tensor(2, {1}))) == 0.0);
  CHECK_THROWS(contract(f, f, 3, id));
  Eigen::MatrixXd g(2, 2);
  g << 2.0, 0.5, 0.5, 1.0;
  // Pairing uses the gram matrix: <e2, e1> = 0.5.
  CHECK(contract(unit_tensor(2, {1}), unit_tensor(2, {0}), 1, g).scalar_value() == Approx(0.5));
}

TEST_CASE("symmetric tensor storage") {
  for (std::size_t d : {1, 2, 3, 4}) {
    for (int q = 0; q <= 4; ++q) {
      SymTensor s(d, q);
      CHECK(s.flat_size() == static_cast<std::size_t>(std::llround(binomial(static_cast<int>(d) + q - 1, q))));
    }
  }
  Tensor t(3, 3);
  for (std::size_t i = 0; i < t.shape().size(); ++i) t[i] = std::sin(1.0 + i);
  const Tensor s = t.symmetrized();
  CHECK(s.is_symmetric());
  CHECK_FALSE(t.is_symmetric());
  CHECK(SymTensor::from_tensor(s).to_tensor().max_abs_diff(s) < 1e-15);
}

TEST_CASE("wick expectation") {
  auto id = GaussianSpace::identity(1);
  const PolyRV z = PolyRV::coordinate(id, 0);
  CHECK(wick_expectation(z * z * z * z) == Approx(3.0));
  CHECK(wick_expectation(z * z * z * z * z * z) == Approx(15.0));
  CHECK(wick_expectation(z * z * z) == 0.0);
  for (double r : {0.0, 0.3, -0.7}) {
    auto s = corr_space(r);
    const PolyRV x = PolyRV::gaussian(s, HilbertVec::basis(2, 0));
    const PolyRV y = PolyRV::gaussian(s, HilbertVec::basis(2, 1));
    CHECK(wick_expectation(x * x * y * y) == Approx(1.0 + 2.0 * r * r));
    const std::vector<std::vector<double>> c = {{1.0, r}, {r, 1.0}};
    CHECK(wick_expectation(x * x * x * y * y * y) == Approx(oracle::isserlis({0, 0, 0, 1, 1, 1}, c)));
  }
  PolyRV big = PolyRV::constant(id, 1.0);
  for (int i = 0; i < 40; ++i) big = big * z;
  CHECK(big.degree() == 40);
  CHECK(throws_with([&] { (void)(big * z); }, "degree cap"));
}

TEST_CASE("polynomial invariants") {
  auto id = GaussianSpace::identity(2);
  const PolyRV z = PolyRV::coordinate(id, 0);
  const PolyRV w = PolyRV::coordinate(id, 1);
  PolyRV p = z * w + z * 1e-15;
  CHECK(p.terms().size() == 1);
  CHECK(p.degree() == 2);
  PolyRV q = z * z - z * z;
  CHECK(q.is_zero());
  CHECK(q.degree() == 0);
  CHECK_THROWS(z + PolyRV::coordinate(GaussianSpace::identity(2), 0));
}

TEST_CASE("malliavin derivative") {
  Eigen::MatrixXd g(2, 2);
  g << 1.5, 0.4, 0.4, 0.8;
  auto s = GaussianSpace::create(g);
  HilbertVec h{Eigen::Vector2d(0.7, -1.1)};
  const PolyRV x = PolyRV::gaussian(s, h);
  const Tensor h_on = Tensor::from_vector(s->to_orthonormal(h));
  const RVTensor d1 = derivative(x * x * x, 1);
  CHECK(d1.max_abs_diff(RVTensor::scaled(3.0 * x * x, h_on, Basis::orthonormal)) < 1e-12);
  const RVTensor d2 = derivative(x * x * x, 2);
  CHECK(d2.max_abs_diff(RVTensor::scaled(6.0 * x, tensor_product(h_on, h_on), Basis::orthonormal)) < 1e-12);
  CHECK(d2.is_symmetric());
  const RVTensor d0 = derivative(PolyRV::constant(s, 4.0), 3);
  for (std::size_t i = 0; i < d0.size(); ++i) CHECK(d0[i].is_zero());
}

TEST_CASE("skorohod integral examples") {
  Eigen::MatrixXd g(2, 2);
  g << 2.0, 0.6, 0.6, 1.0;
  auto s = GaussianSpace::create(g);
  HilbertVec h{Eigen::Vector2d(0.3, 0.5)};
  h.coeffs /= std::sqrt(s->inner_product(h, h));
  const PolyRV x = PolyRV::gaussian(s, h);
  const PolyRV one = PolyRV::constant(s, 1.0);
  const Tensor h_raw = Tensor::from_vector(h.coeffs);
  const RVTensor u1 = RVTensor::scaled(one, h_raw, Basis::raw).to_orthonormal();
  CHECK(max_abs_diff(skorohod(u1), x) < 1e-12);
  const RVTensor u2 = RVTensor::scaled(x, h_raw, Basis::raw).to_orthonormal();
  CHECK(max_abs_diff(skorohod(u2), x * x + (-1.0)) < 1e-12);
  const RVTensor u3 = RVTensor::scaled(one, tensor_product(h_raw, h_raw), Basis::raw).to_orthonormal();
  CHECK(max_abs_diff(skorohod(u3), x * x + (-1.0)) < 1e-12);
  CHECK(max_abs_diff(skorohod(u3), multiple_integral(tensor_product(h_raw, h_raw), s).value) < 1e-12);
  CHECK(throws_with([&] { skorohod(RVTensor::scaled(one, h_raw, Basis::raw)); }, "basis"));
}

TEST_CASE("multiple integrals") {
  Eigen::MatrixXd g(2, 2);
  g << 2.0, 0.6, 0.6, 1.0;
  auto s = GaussianSpace::create(g);
  HilbertVec h{Eigen::Vector2d(1.2, -0.4)};
  const double c2 = s->inner_product(h, h);
  const PolyRV x = PolyRV::gaussian(s, h);
  const Tensor ht = Tensor::from_vector(h.coeffs);
  CHECK(max_abs_diff(multiple_integral(ht, s).value, x) < 1e-12);
  CHECK(max_abs_diff(multiple_integral(tensor_product(ht, ht), s).value, x * x + (-c2)) < 1e-12);

  auto id = GaussianSpace::identity(2);
  const PolyRV z1 = PolyRV::coordinate(id, 0), z2 = PolyRV::coordinate(id, 1);
  const IntegralResult sym = multiple_integral(unit_tensor(2, {0, 1}).symmetrized(), id);
  CHECK_FALSE(sym.symmetrized);
  CHECK(max_abs_diff(sym.value, z1 * z2) < 1e-12);
  const IntegralResult asym = multiple_integral(unit_tensor(2, {0, 1}), id);
  CHECK(asym.symmetrized);
  CHECK(max_abs_diff(asym.value, z1 * z2) < 1e-12);

  // Orthogonality across chaoses.
  const PolyRV i1 = multiple_integral(ht, s).value;
  const PolyRV i2 = multiple_integral(tensor_product(ht, ht), s).value;
  CHECK(std::abs(wick_expectation(i1 * i2)) < 1e-12);
  CHECK(wick_expectation(i2 * i2) == Approx(2.0 * c2 * c2));
}

TEST_CASE("ornstein-uhlenbeck generator") {
  auto id = GaussianSpace::identity(1);
  const PolyRV z = PolyRV::coordinate(id, 0);
  CHECK(max_abs_diff(ou_generator(z), -z) < 1e-14);
  const PolyRV he2 = z * z + (-1.0);
  CHECK(max_abs_diff(ou_generator(he2), -2.0 * he2) < 1e-14);
  const PolyRV z3 = z * z * z;
  CHECK(max_abs_diff(ou_generator(z3), -3.0 * z3 + 6.0 * z) < 1e-12);
  CHECK(max_abs_diff(ou_generator_chaos(z3), -3.0 * z3 + 6.0 * z) < 1e-12);
  CHECK(max_abs_diff(chaos_projection(z3, 1), 3.0 * z) < 1e-12);
  CHECK(max_abs_diff(chaos_projection(z3, 3), z3 - 3.0 * z) < 1e-12);
}
