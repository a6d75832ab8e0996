#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <Eigen/SVD>

#include "resgr/hierarchy.hpp"
#include "test_support.hpp"

using namespace resgr;
using resgr::testing::dist;
using resgr::testing::random_op;
using resgr::testing::random_point;
using resgr::testing::random_skew;

namespace {

std::int64_t binomial(int n, int r) {
  if (r < 0 || n < 0 || r > n) return 0;
  std::int64_t c = 1;
  for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return c;
}

/// Coefficients of (mu + lambda P+)^k in lambda, by solving the Vandermonde
/// system on k+1 sample points.
std::vector<BlockOperator> interpolate_w(int k, const BlockOperator& mu) {
  const Dims d = mu.dims();
  const int m = k + 1;
  Eigen::MatrixXd v(m, m);
  std::vector<Matrix> samples;
  for (int i = 0; i < m; ++i) {
    const double lam = -1.0 + 2.0 * i / std::max(1, k);
    for (int j = 0; j < m; ++j) v(i, j) = std::pow(lam, j);
    BlockOperator y = mu + lam * projector_p_plus(d);
    Matrix pw = Matrix::Identity(d.total(), d.total());
    for (int e = 0; e < k; ++e) pw = pw * y.full();
    samples.push_back(pw);
  }
  const Eigen::MatrixXd vinv = v.inverse();
  std::vector<BlockOperator> out;
  for (int j = 0; j < m; ++j) {
    Matrix c = Matrix::Zero(d.total(), d.total());
    for (int i = 0; i < m; ++i) c += vinv(j, i) * samples[i];
    out.emplace_back(d, c);
  }
  return out;
}

Gradient linear_functional(const BlockOperator& a) { return {0.0, a}; }

}  // namespace

TEST(Ids, Validation) {
  EXPECT_THROW(validate(Wbasis{0, 0}), IndexOutOfRange);
  EXPECT_THROW(validate(Wbasis{2, 3}), IndexOutOfRange);
  EXPECT_THROW(validate(Hbasis{1, 3}), IndexOutOfRange);
  EXPECT_NO_THROW(validate(Hbasis{1, 2}));
  EXPECT_THROW(w_poly(2, 4, BlockOperator(Dims(1, 1))), IndexOutOfRange);
  EXPECT_THROW(h_poly(2, 4, BlockOperator(Dims(1, 1))), IndexOutOfRange);
}

TEST(WPoly, ClosedForms) {
  std::mt19937_64 rng(31);
  const Dims d(2, 3);
  const auto mu = random_op(rng, d);
  const auto pp = projector_p_plus(d);
  for (int k = 1; k <= 6; ++k) {
    EXPECT_LE(dist(w_poly(k, k, mu), pp), 1e-14);
    BlockOperator muk = BlockOperator::identity(d);
    for (int i = 0; i < k; ++i) muk = muk * mu;
    EXPECT_LE(dist(w_poly(k, 0, mu), muk), 1e-12);
  }
  EXPECT_LE(dist(w_poly(2, 1, mu), mu * pp + pp * mu), 1e-14);
}

TEST(WPoly, MatchesInterpolation) {
  std::mt19937_64 rng(32);
  const auto mu = random_op(rng, Dims(2, 3), 0.8);
  const auto oracle = interpolate_w(5, mu);
  for (int n = 0; n <= 5; ++n) EXPECT_LE(dist(w_poly(5, n, mu), oracle[n]), 1e-10) << n;
}

TEST(WPoly, LeftAndRightRecurrencesAgree) {
  std::mt19937_64 rng(33);
  const auto mu = random_op(rng, Dims(3, 2));
  for (int k = 0; k <= 8; ++k) {
    const auto r = w_table(k, mu);
    const auto l = w_table_left(k, mu);
    for (int n = 0; n <= k; ++n) EXPECT_LE(dist(r[n], l[n]), 1e-11);
  }
}

TEST(WPoly, CommutationRelation) {
  std::mt19937_64 rng(34);
  const Dims d(2, 2);
  const auto mu = random_op(rng, d);
  const auto pp = projector_p_plus(d);
  for (int k = 1; k <= 8; ++k) {
    for (int n = 0; n <= k + 1; ++n) {
      const auto lhs = commutator(mu, w_poly(k, n, mu)) + commutator(pp, w_poly(k, n - 1, mu));
      EXPECT_LE(lhs.full().norm(), 1e-11) << k << "," << n;
    }
  }
}

TEST(HPoly, ClosedForms) {
  std::mt19937_64 rng(35);
  const Dims d(2, 3);
  const auto mu = random_op(rng, d);
  const auto pp = projector_p_plus(d);
  BlockOperator muk = BlockOperator::identity(d);
  BlockOperator alt = pp;
  for (int l = 0; l <= 5; ++l) {
    EXPECT_LE(dist(h_poly(l, 0, mu), muk), 1e-12);
    EXPECT_LE(dist(h_poly(l, l + 1, mu), alt), 1e-12);
    muk = muk * mu;
    alt = alt * mu * pp;
  }
  EXPECT_LE(dist(h_poly(1, 1, mu), pp * mu + mu * pp), 1e-14);
}

TEST(HPoly, EnumerationMatchesRecurrence) {
  std::mt19937_64 rng(36);
  const auto mu = random_op(rng, Dims(2, 2));
  for (int l = 0; l <= 6; ++l) {
    const auto t = h_table(l, mu);
    for (int n = 0; n <= l + 1; ++n) {
      EXPECT_LE(dist(h_poly_enumerated(l, n, mu), t[n]), 1e-11) << l << "," << n;
    }
  }
}

TEST(HPoly, TermCount) {
  // With mu = identity every tuple contributes a product of projectors.
  const Dims d(1, 1);
  const auto one = BlockOperator::identity(d);
  for (int l = 0; l <= 6; ++l) {
    for (int n = 1; n <= l + 1; ++n) {
      const auto h = h_poly(l, n, one);
      EXPECT_NEAR(h.full()(0, 0).real(), static_cast<double>(binomial(l + 1, n)), 1e-12);
    }
  }
}

TEST(PCoeff, InitialAndSecondSlice) {
  for (int l = 0; l <= 5; ++l)
    for (int k = l + 1; k <= 12; ++k) EXPECT_EQ(p_coeff(l, 1, k), 1);
  for (int k = 2; k <= 12; ++k) EXPECT_EQ(p_coeff(1, 2, k), k - 2);
  EXPECT_THROW(p_coeff(0, 0, 3), IndexOutOfRange);
}

TEST(PCoeff, BinomialClosedForm) {
  for (int l = 0; l <= 6; ++l)
    for (int n = 1; n <= l + 1; ++n)
      for (int k = l + 1; k <= 14; ++k)
        EXPECT_EQ(p_coeff(l, n, k), binomial(k - l - 1, n - 1)) << l << "," << n << "," << k;
}

TEST(PCoeff, ShiftRecurrence) {
  for (int l = 0; l <= 5; ++l)
    for (int n = 1; n <= l + 1; ++n)
      for (int k = l + 2; k <= 12; ++k) EXPECT_EQ(p_coeff(l + 1, n, k), p_coeff(l, n, k - 1));
}

TEST(PCoeff, ConcurrentReaders) {
  std::vector<std::thread> threads;
  std::atomic<int> bad{0};
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int k = 10; k <= 30; ++k)
        if (p_coeff(3 + t % 3, 3, k) != binomial(k - 3 - t % 3 - 1, 2)) ++bad;
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(bad.load(), 0);
}

TEST(PCoeff, WInTermsOfH) {
  std::mt19937_64 rng(37);
  const auto mu = random_op(rng, Dims(2, 2));
  for (int k = 1; k <= 8; ++k)
    for (int l = 0; l < k; ++l)
      EXPECT_LE(dist(w_poly(k, k - l, mu), w_from_h(k, l, mu)), 1e-9) << k << "," << l;
}

TEST(PCoeff, SpanHasFullRank) {
  std::mt19937_64 rng(38);
  const auto mu = random_op(rng, Dims(3, 3));
  for (int l = 0; l <= 4; ++l) {
    Eigen::MatrixXd coeff(l + 2, l + 1);
    Matrix flat(mu.dims().total() * mu.dims().total(), l + 2);
    for (int k = l + 1; k <= 2 * l + 2; ++k) {
      for (int n = 1; n <= l + 1; ++n)
        coeff(k - l - 1, n - 1) = static_cast<double>(std::max<std::int64_t>(0, p_coeff(l, n, k)));
      flat.col(k - l - 1) = w_poly(k, k - l, mu).full().reshaped();
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(coeff);
    EXPECT_EQ(lu.rank(), l + 1);
    Eigen::JacobiSVD<Matrix> svd(flat);
    const auto s = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < s.size(); ++i) rank += s(i) > 1e-9 * s(0);
    EXPECT_EQ(rank, l + 1);
  }
}

TEST(Casimir, ZeroAtOriginAndEpsZero) {
  std::mt19937_64 rng(39);
  const Dims d(2, 3);
  for (int k = 1; k <= 5; ++k) {
    EXPECT_LE(std::abs(casimir(k, {Complex(0.3, 1.1), BlockOperator(d)})), 1e-14);
    const auto p = random_point(rng, d);
    BlockOperator pw = BlockOperator::identity(d);
    for (int i = 0; i <= k; ++i) pw = pw * p.mu;
    EXPECT_LE(std::abs(casimir(k, p, 0.0) - restricted_trace(pw)), 1e-11);
  }
}

TEST(Casimir, MatchesDirectExpansion) {
  std::mt19937_64 rng(40);
  const Dims d(2, 2);
  const auto p = random_point(rng, d);
  for (int k = 1; k <= 5; ++k) {
    for (double eps : {0.5, 1.0}) {
      BlockOperator shifted = p.mu - (eps * p.gamma) * projector_p_plus(d);
      BlockOperator pw = BlockOperator::identity(d);
      for (int i = 0; i <= k; ++i) pw = pw * shifted;
      const Complex direct = restricted_trace(pw - std::pow(-eps * p.gamma, k) * shifted);
      EXPECT_LE(std::abs(casimir(k, p, eps) - direct), 1e-10);
    }
  }
}

TEST(Casimir, InvariantUnderGroupCoadjoint) {
  std::mt19937_64 rng(41);
  const Dims d(2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_point(rng, d);
    const BlockOperator a = BlockOperator::identity(d) + random_op(rng, d, 0.3);
    const auto q = group_coad(a, p);
    for (int k = 1; k <= 4; ++k) EXPECT_LE(std::abs(casimir(k, q) - casimir(k, p)), 1e-9);
  }
}

TEST(Hamiltonian, SpecialValues) {
  std::mt19937_64 rng(42);
  const Dims d(2, 3);
  const auto p = random_point(rng, d);
  for (int k = 1; k <= 4; ++k) {
    BlockOperator pw = BlockOperator::identity(d);
    for (int i = 0; i <= k; ++i) pw = pw * p.mu;
    EXPECT_LE(std::abs(hamiltonian(Wbasis{k, 0}, p) - restricted_trace(pw)), 1e-11);
    const ExtendedPoint zero{p.gamma, BlockOperator(d)};
    for (int n = 0; n <= k; ++n) EXPECT_LE(std::abs(hamiltonian(Wbasis{k, n}, zero)), 1e-14);
  }
}

TEST(Hamiltonian, GradientClosedForms) {
  std::mt19937_64 rng(43);
  const Dims d(2, 2);
  const auto p = random_point(rng, d);
  EXPECT_LE(dist(grad_hamiltonian(Wbasis{1, 0}, p), 2.0 * p.mu), 1e-14);
  for (int k = 1; k <= 4; ++k) {
    const auto expect = std::pow(p.gamma, k) * (static_cast<double>(k + 1) * projector_p_plus(d) -
                                                BlockOperator::identity(d));
    EXPECT_LE(dist(grad_hamiltonian(Wbasis{k, k}, p), expect), 1e-12);
  }
}

TEST(Hamiltonian, Involution) {
  std::mt19937_64 rng(44);
  const Dims d(2, 2);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_point(rng, d, 0.8);
    for (int k = 1; k <= 3; ++k)
      for (int n = 0; n <= k; ++n)
        for (int l = 1; l <= 3; ++l)
          for (int m = 0; m <= l; ++m)
            for (double eps : {0.0, 0.5, 1.0}) {
              const Complex b =
                  poisson_bracket(gradient_of(Wbasis{k, n}), gradient_of(Wbasis{l, m}), p, eps);
              worst = std::max(worst, std::abs(b));
            }
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Hamiltonian, MagriChain) {
  std::mt19937_64 rng(45);
  const Dims d(2, 3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_point(rng, d);
    const auto f = linear_functional(random_op(rng, d));
    for (int k = 1; k <= 4; ++k) {
      // {h_{n+1}, F}_1 = {h_n, F}_2, with {h_0, .}_1 ... ends {h_k, .}_2 = 0.
      for (int n = 0; n < k; ++n) {
        const auto gn = gradient_of(Wbasis{k, n})(p);
        const auto gn1 = gradient_of(Wbasis{k, n + 1})(p);
        EXPECT_LE(std::abs(lie_poisson_part(gn1.d_mu, f.d_mu, p) - cocycle_part(gn.d_mu, f.d_mu, p)),
                  1e-9)
            << k << "," << n;
      }
      const auto g0 = gradient_of(Wbasis{k, 0})(p);
      const auto gk = gradient_of(Wbasis{k, k})(p);
      EXPECT_LE(std::abs(lie_poisson_part(g0.d_mu, f.d_mu, p)), 1e-9);
      EXPECT_LE(std::abs(cocycle_part(gk.d_mu, f.d_mu, p)), 1e-12);
    }
  }
}

TEST(FlowRhs, FormsAgree) {
  std::mt19937_64 rng(46);
  const Dims d(2, 3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_point(rng, d);
    for (int k = 1; k <= 5; ++k) {
      for (int n = 0; n <= k; ++n) {
        const Wbasis id{k, n};
        const auto w = flow_rhs(id, RhsForm::W_form, p);
        const double scale = 1.0 + w.full().norm();
        EXPECT_LE(dist(w, flow_rhs(id, RhsForm::MU_form, p)), 1e-10 * scale);
        EXPECT_LE(dist(w, flow_rhs(id, RhsForm::PPLUS_form, p)), 1e-10 * scale);
        EXPECT_LE(dist(w, hamilton_rhs(grad_hamiltonian(id, p), p)), 1e-10 * scale);
      }
    }
  }
}

TEST(FlowRhs, HFormIsHamiltonian) {
  std::mt19937_64 rng(47);
  const Dims d(2, 2);
  const auto p = random_point(rng, d);
  for (int l = 0; l <= 4; ++l) {
    for (int n = 0; n <= l + 1; ++n) {
      const Hbasis id{l, n};
      const auto g = numeric_gradient([&](const ExtendedPoint& q) { return hamiltonian(id, q); }, p);
      EXPECT_LE(dist(g.d_mu, grad_hamiltonian(id, p)), 1e-6);
      EXPECT_LE(dist(flow_rhs(id, RhsForm::H_form, p), hamilton_rhs(grad_hamiltonian(id, p), p)),
                1e-12);
    }
  }
}

TEST(FlowRhs, BlockDiagonalFixedPoint) {
  std::mt19937_64 rng(48);
  const Dims d(2, 3);
  const ExtendedPoint p{Complex(0.2, 0.9), diagonal_part(random_op(rng, d))};
  for (int k = 1; k <= 4; ++k)
    for (int n = 0; n <= k; ++n)
      EXPECT_EQ(flow_rhs(Wbasis{k, n}, RhsForm::PPLUS_form, p).full().cwiseAbs().maxCoeff(), 0.0);
}

TEST(FlowRhs, PPlusDiagonalBlocksExactlyZero) {
  std::mt19937_64 rng(49);
  const auto p = random_point(rng, Dims(3, 2));
  for (int k = 1; k <= 4; ++k) {
    for (int n = 0; n <= k; ++n) {
      const auto r = flow_rhs(Wbasis{k, n}, RhsForm::PPLUS_form, p);
      EXPECT_EQ(r.pp().cwiseAbs().maxCoeff(), 0.0);
      EXPECT_EQ(r.mm().cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(FlowRhs, PowerFlowOffDiagonal) {
  std::mt19937_64 rng(50);
  const auto p = random_point(rng, Dims(2, 3));
  for (int k = 1; k <= 4; ++k) {
    BlockOperator muk = BlockOperator::identity(p.dims());
    for (int i = 0; i < k; ++i) muk = muk * p.mu;
    const auto r = flow_rhs(Hbasis{k, 0}, RhsForm::H_form, p);
    EXPECT_LE((r.pm() + p.gamma * muk.pm()).norm(), 1e-11);
    EXPECT_LE((r.mp() - p.gamma * muk.mp()).norm(), 1e-11);
  }
}

TEST(FlowRhs, RealFormSkew) {
  std::mt19937_64 rng(51);
  const Dims d(2, 3);
  const ExtendedPoint p{Complex(0.0, 1.3), random_skew(rng, d)};
  for (int l = 0; l <= 5; ++l) {
    for (int n = 0; n <= l + 1; ++n) {
      EXPECT_TRUE(is_skew_hermitian(flow_rhs(Hbasis{l, n}, RhsForm::REAL_form, p), 1e-12));
      const auto h = h_poly(l, n, p.mu);
      EXPECT_LE(dist(adjoint(h), (l % 2 == 0 ? 1.0 : -1.0) * h), 1e-12);
    }
  }
  EXPECT_THROW(flow_rhs(Hbasis{1, 1}, RhsForm::REAL_form, random_point(rng, d)), InvalidArgument);
}

TEST(FlowRhs, InvalidCombinations) {
  std::mt19937_64 rng(52);
  const auto p = random_point(rng, Dims(2, 2));
  EXPECT_THROW(flow_rhs(Wbasis{1, 0}, RhsForm::H_form, p), InvalidArgument);
  EXPECT_THROW(flow_rhs(Hbasis{1, 0}, RhsForm::MU_form, p), InvalidArgument);
  EXPECT_THROW(flow_rhs(Generating{0.1, 0.1}, RhsForm::PPLUS_form, p), InvalidArgument);
}

TEST(FlowRhs, OffDiagonalLinearWhenPlusBlockVanishes) {
  std::mt19937_64 rng(53);
  const Dims d(2, 3);
  const Complex gamma(0.4, 0.7);
  BlockOperator base(d);
  base.mm() = random_op(rng, d).mm();
  BlockOperator a(d), b(d);
  a.pm() = random_op(rng, d).pm();
  b.pm() = random_op(rng, d).pm();
  const Complex c(0.3, -1.2);
  for (int l = 1; l <= 4; ++l) {
    auto rhs = [&](const BlockOperator& off) {
      return off_diagonal_part(flow_rhs(Hbasis{l, 0}, RhsForm::H_form, {gamma, base + off}));
    };
    EXPECT_LE(dist(rhs(a + b), rhs(a) + rhs(b)), 1e-10);
    EXPECT_LE(dist(rhs(c * a), c * rhs(a)), 1e-10);
  }
}

TEST(FlowRhs, GenYIdentityIsFixed) {
  const Dims d(2, 2);
  const auto r = flow_rhs(Generating{0.2, 0.3}, RhsForm::GEN_Y_form,
                          {Complex(0.5, 1.0), BlockOperator::identity(d)});
  EXPECT_EQ(r.full().cwiseAbs().maxCoeff(), 0.0);
}

TEST(FlowRhs, GenYMatchesGeneratingFlow) {
  // y = (1 - kappa (mu + lambda gamma P+))^-1 evolves by the y-equation when mu
  // evolves by the generating Hamiltonian with the same (kappa, lambda).
  std::mt19937_64 rng(54);
  const Dims d(2, 2);
  const auto p = random_point(rng, d, 0.2);
  const Complex kappa(0.3, 0.1), lambda(0.4, -0.2);
  const auto dmu = flow_rhs(Generating{kappa, lambda}, RhsForm::W_form, p);
  const auto y = gen_y_from_mu(kappa, lambda, p);
  const auto dy = kappa * (y * dmu * y);
  EXPECT_LE(dist(dy, gen_y_rhs(kappa, lambda, p.gamma, y)), 1e-10);
}

TEST(Generating, ClosedFormMatchesSeries) {
  std::mt19937_64 rng(55);
  const Dims d(2, 2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_point(rng, d, 0.3);
    const auto kl = resgr::testing::random_matrix(rng, 1, 2, 0.4);
    const Complex kappa = kl(0, 0), lambda = kl(0, 1);
    const double r = std::abs(kappa) * (star_norm(p.mu) + std::abs(lambda * p.gamma));
    if (r >= 0.6) continue;
    const auto s = generating_hamiltonian_series(kappa, lambda, p, 60);
    const Complex c = generating_hamiltonian(kappa, lambda, p);
    EXPECT_LE(std::abs(c - s.value), 1e-8 * std::max(1.0, std::abs(c)) + s.tail_bound);
    EXPECT_LE(s.tail_bound, 1e-10);
  }
}

TEST(Generating, ZeroMu) {
  const ExtendedPoint p{Complex(0.3, 0.5), BlockOperator(Dims(2, 3))};
  const auto s = generating_hamiltonian_series(0.4, 0.7, p, 30);
  EXPECT_LE(std::abs(s.value), 1e-15);
  EXPECT_LE(std::abs(generating_hamiltonian(0.4, 0.7, p) - s.value), 1e-14);
}

TEST(Generating, RadiusEnforced) {
  std::mt19937_64 rng(56);
  const auto p = random_point(rng, Dims(2, 2));
  EXPECT_THROW(generating_hamiltonian(10.0, 0.1, p), RadiusViolation);
  EXPECT_THROW(grad_generating(10.0, 0.1, p), RadiusViolation);
}

TEST(Generating, GradientAndInvolution) {
  std::mt19937_64 rng(57);
  const Dims d(2, 2);
  const auto p = random_point(rng, d, 0.3);
  const Generating a{Complex(0.3, 0.1), Complex(0.5, -0.2)};
  const Generating b{Complex(-0.2, 0.25), Complex(-0.4, 0.3)};
  const auto g = numeric_gradient([&](const ExtendedPoint& q) { return hamiltonian(a, q); }, p);
  EXPECT_LE(dist(g.d_mu, grad_hamiltonian(a, p)), 1e-6);
  for (double eps : {0.0, 0.5, 1.0})
    EXPECT_LE(std::abs(poisson_bracket(gradient_of(a), gradient_of(b), p, eps)), 1e-8);
}

TEST(Tau, Prefactor) {
  std::mt19937_64 rng(58);
  const auto p = random_point(rng, Dims(2, 2));
  for (int k = 1; k <= 6; ++k) {
    for (int l = 0; l < k; ++l) {
      const auto t = tau_reparametrization_check(l, k, p);
      EXPECT_LE(t.relative_residual, 1e-10) << k << "," << l;
      EXPECT_LE(std::abs(t.prefactor - t.expected), 1e-9 * std::abs(t.expected));
    }
  }
}
