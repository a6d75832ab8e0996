#include <gtest/gtest.h>

#include "resgr/extension.hpp"
#include "test_support.hpp"

using namespace resgr;
using resgr::testing::dist;
using resgr::testing::random_matrix;
using resgr::testing::random_op;

namespace {

const Dims kDims(2, 3);

double maxabs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

ExtendedAlgebraElement random_element(std::mt19937_64& rng, double scale = 1.0) {
  return {random_matrix(rng, kDims.n_plus, kDims.n_plus, scale), random_op(rng, kDims, scale)};
}

ExtendedCovector random_covector(std::mt19937_64& rng) {
  return {random_matrix(rng, kDims.n_plus, kDims.n_plus), random_op(rng, kDims)};
}

LocalGroupElement near_identity(std::mt19937_64& rng, double eps = 0.1) {
  return group_exp(random_element(rng, eps));
}

double element_dist(const ExtendedAlgebraElement& a, const ExtendedAlgebraElement& b) {
  return std::max(maxabs(a.rho - b.rho), maxabs(a.x.full() - b.x.full()));
}

ExtendedAlgebraElement scaled(double s, const ExtendedAlgebraElement& e) {
  return {s * e.rho, s * e.x};
}

}  // namespace

TEST(Extension, PhiMap) {
  std::mt19937_64 rng(101);
  const Matrix n = random_matrix(rng, 2, 2);
  EXPECT_EQ(phi_map(BlockOperator::identity(kDims), n), n);
  const auto a = near_identity(rng).a;
  const Matrix n1 = random_matrix(rng, 2, 2), n2 = random_matrix(rng, 2, 2);
  EXPECT_LE(maxabs(phi_map(a, n1 * n2) - phi_map(a, n1) * phi_map(a, n2)), 1e-13);
  EXPECT_THROW(phi_map(a, random_matrix(rng, 3, 3)), DimensionMismatch);
  BlockOperator singular = BlockOperator::identity(kDims);
  singular.pp()(1, 1) = 0.0;
  EXPECT_THROW(phi_map(singular, n), SingularOperator);
}

TEST(Extension, PhiDerivativeIsBracketWithPlusBlock) {
  std::mt19937_64 rng(102);
  const BlockOperator x = random_op(rng, kDims);
  const Matrix zeta = random_matrix(rng, 2, 2);
  auto f = [&](double s, double t) -> Matrix {
    return phi_map(expm(s * x), expm(Matrix(t * zeta)));
  };
  EXPECT_LE(maxabs(mixed_derivative(f, 1e-4) - phi_alg(x, zeta)), 1e-6);
}

TEST(Extension, OmegaMap) {
  std::mt19937_64 rng(103);
  const auto a = near_identity(rng).a;
  const Matrix one = Matrix::Identity(2, 2);
  const BlockOperator id = BlockOperator::identity(kDims);
  EXPECT_LE(maxabs(omega_map(id, a) - one), 1e-14);
  EXPECT_LE(maxabs(omega_map(a, id) - one), 1e-14);
  for (int i = 0; i < 5; ++i) {
    const auto a1 = near_identity(rng).a, a2 = near_identity(rng).a, a3 = near_identity(rng).a;
    EXPECT_LE(group_condition_residual(a1, a2, a3, near_identity(rng).n), 1e-10);
  }
}

TEST(Extension, OmegaMixedDerivatives) {
  std::mt19937_64 rng(104);
  const BlockOperator x = random_op(rng, kDims), y = random_op(rng, kDims);
  auto om = [&](const BlockOperator& u, const BlockOperator& v) {
    return [&u, &v](double s, double t) -> Matrix { return omega_map(expm(s * u), expm(t * v)); };
  };
  const Matrix d12 = mixed_derivative(om(x, y), 1e-4);
  const Matrix d21 = mixed_derivative(om(y, x), 1e-4);
  EXPECT_LE(maxabs(d12 + x.pm() * y.mp()), 1e-6);
  EXPECT_LE(maxabs(d12 - d21 - omega_alg(x, y)), 1e-6);

  auto det_om = [&](const BlockOperator& u, const BlockOperator& v) {
    return [&u, &v](double s, double t) -> Complex {
      return omega_map(expm(s * u), expm(t * v)).determinant();
    };
  };
  const Complex tilde = mixed_derivative(det_om(x, y), 1e-4) - mixed_derivative(det_om(y, x), 1e-4);
  EXPECT_LE(std::abs(tilde - tilde_omega(x, y)), 1e-5);
  EXPECT_LE(std::abs(tilde + schwinger(x, y)), 1e-5);
}

TEST(Extension, AdjointIdentityAndHomomorphism) {
  std::mt19937_64 rng(105);
  const auto e = random_element(rng);
  EXPECT_LE(element_dist(extended_adjoint(group_identity(kDims), e), e), 1e-14);
  for (int i = 0; i < 5; ++i) {
    const auto g1 = near_identity(rng), g2 = near_identity(rng);
    const auto lhs = extended_adjoint(multiply(g1, g2), e);
    const auto rhs = extended_adjoint(g1, extended_adjoint(g2, e));
    EXPECT_LE(element_dist(lhs, rhs), 1e-8);
  }
}

TEST(Extension, AdjointDerivativeIsBracket) {
  std::mt19937_64 rng(106);
  const auto a = random_element(rng), e = random_element(rng);
  auto path = [&](double t) { return extended_adjoint(group_exp(scaled(t, a)), e); };
  const double h = 1e-5;
  const auto plus = path(h), minus = path(-h);
  const ExtendedAlgebraElement fd{(plus.rho - minus.rho) / (2.0 * h),
                                  (1.0 / (2.0 * h)) * (plus.x - minus.x)};
  EXPECT_LE(element_dist(fd, extended_bracket(a, e)), 1e-5);
}

TEST(Extension, BracketAntisymmetryAndJacobi) {
  std::mt19937_64 rng(107);
  for (int i = 0; i < 5; ++i) {
    const auto a = random_element(rng), b = random_element(rng), c = random_element(rng);
    EXPECT_LE(element_dist(extended_bracket(a, a), {Matrix::Zero(2, 2), BlockOperator(kDims)}),
              1e-15);
    const auto ab = extended_bracket(a, b), ba = extended_bracket(b, a);
    EXPECT_LE(element_dist(ab, scaled(-1.0, ba)), 1e-15);
    const auto j1 = extended_bracket(a, extended_bracket(b, c));
    const auto j2 = extended_bracket(b, extended_bracket(c, a));
    const auto j3 = extended_bracket(c, extended_bracket(a, b));
    EXPECT_LE(maxabs(j1.rho + j2.rho + j3.rho), 1e-11);
    EXPECT_LE(maxabs(j1.x.full() + j2.x.full() + j3.x.full()), 1e-11);
  }
}

TEST(Extension, InfinitesimalConditions) {
  std::mt19937_64 rng(108);
  for (int i = 0; i < 5; ++i) {
    const auto x = random_op(rng, kDims), y = random_op(rng, kDims), z = random_op(rng, kDims);
    EXPECT_LE(maxabs(omega_condition(x, y, z)), 1e-11);
    EXPECT_LE(maxabs(phi_condition(x, y, random_matrix(rng, 2, 2))), 1e-11);
    EXPECT_LE(maxabs(omega_alg(x, y) + omega_alg(y, x)), 1e-15);
  }
  // The repeated-argument form ω([η',η''],η') is not a cocycle condition.
  const auto x = random_op(rng, kDims), y = random_op(rng, kDims), z = random_op(rng, kDims);
  const Matrix as_printed = omega_alg(commutator(x, y), z) + omega_alg(commutator(y, z), y) +
                            omega_alg(commutator(z, x), y) - phi_alg(x, omega_alg(y, z)) -
                            phi_alg(y, omega_alg(z, x)) - phi_alg(z, omega_alg(x, y));
  EXPECT_GT(maxabs(as_printed), 1e-3);
}

TEST(Extension, CoadjointIdentityAndDuality) {
  std::mt19937_64 rng(109);
  const auto m = random_covector(rng);
  const auto same = extended_coadjoint(group_identity(kDims), m);
  EXPECT_LE(maxabs(same.tau - m.tau), 1e-14);
  EXPECT_LE(dist(same.mu, m.mu), 1e-14);
  for (int i = 0; i < 5; ++i) {
    const auto g = near_identity(rng, 0.3);
    const auto e = random_element(rng);
    const auto lhs = extended_pairing(extended_coadjoint(g, m), e);
    const auto rhs = extended_pairing(m, extended_adjoint(g, e));
    EXPECT_LE(std::abs(lhs - rhs), 1e-9);
    const auto out = extended_coadjoint(g, m);
    EXPECT_EQ(out.tau.rows(), kDims.n_plus);
    EXPECT_EQ(out.tau.cols(), kDims.n_plus);
    EXPECT_EQ(out.mu.dims(), kDims);
  }
}

TEST(Extension, InfinitesimalCoadjoint) {
  std::mt19937_64 rng(110);
  const auto m = random_covector(rng);
  const auto a = random_element(rng), b = random_element(rng);
  const Complex lhs = extended_pairing(extended_coad_algebra(a, m), b);
  EXPECT_LE(std::abs(lhs - extended_pairing(m, extended_bracket(a, b))), 1e-12);
  // The group coadjoint is a right action; its derivative is +ad*.
  const double h = 1e-5;
  const auto plus = extended_coadjoint(group_exp(scaled(h, a)), m);
  const auto minus = extended_coadjoint(group_exp(scaled(-h, a)), m);
  const auto ad = extended_coad_algebra(a, m);
  EXPECT_LE(maxabs((plus.tau - minus.tau) / (2.0 * h) - ad.tau), 1e-6);
  EXPECT_LE(maxabs((plus.mu.full() - minus.mu.full()) / (2.0 * h) - ad.mu.full()), 1e-6);
}

TEST(Extension, CentralQuotient) {
  std::mt19937_64 rng(111);
  for (int i = 0; i < 5; ++i) {
    const auto g = near_identity(rng);
    const auto e = random_element(rng);
    const auto big = central_quotient(extended_adjoint(g, e));
    const auto small = central_adjoint(g.a, central_quotient(e));
    EXPECT_LE(std::abs(big.lambda - small.lambda), 1e-8);
    EXPECT_LE(dist(big.x, small.x), 1e-12);
    const auto f = random_element(rng);
    const auto qb = central_quotient(extended_bracket(e, f));
    const auto cb = central_bracket(central_quotient(e), central_quotient(f));
    EXPECT_LE(std::abs(qb.lambda - cb.lambda), 1e-11);
  }
}

TEST(Extension, CentralAdjointDerivativeIsSchwinger) {
  std::mt19937_64 rng(112);
  const BlockOperator x = random_op(rng, kDims), y = random_op(rng, kDims);
  const AlgebraElement e{Complex(0.4, -0.2), x};
  auto path = [&](double t) { return central_adjoint(expm(t * y), e).lambda; };
  const Complex fd = derivative(path, 1e-5);
  EXPECT_LE(std::abs(fd - central_bracket({0.0, y}, e).lambda), 1e-5);
  EXPECT_LE(std::abs(fd + schwinger(y, x)), 1e-5);
}
