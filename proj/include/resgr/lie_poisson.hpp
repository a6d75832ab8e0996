#pragma once

// Lie bracket, Schwinger cocycle, coadjoint actions and the Poisson pencil on
// C (+) L1_res.  Conventions:
//   pairing      <(gamma, mu), (lambda, X)> = gamma lambda + Tr_res(mu X)
//   coadjoint    <ad*_a p, b> = <p, [a, b]>
//   Hamilton     d/dt (gamma, mu) = -ad*_{Dh} (gamma, mu)

#include <functional>

#include "resgr/linalg.hpp"
#include "resgr/polarized.hpp"

namespace resgr {

/// (lambda, X) in C (+) L_res.
struct AlgebraElement {
  Complex lambda{0.0, 0.0};
  BlockOperator x;
};

/// Partial derivatives (D1 F, D2 F) of a scalar field at a point.
struct Gradient {
  Complex d_gamma{0.0, 0.0};
  BlockOperator d_mu;
};

using GradientProvider = std::function<Gradient(const ExtendedPoint&)>;
using ScalarField = std::function<Complex(const ExtendedPoint&)>;

/// s(X, Y) = Tr(X+- Y-+ - Y+- X-+).
inline Complex schwinger(const BlockOperator& x, const BlockOperator& y) {
  x.check_same(y, "schwinger");
  return (x.pm() * y.mp()).trace() - (y.pm() * x.mp()).trace();
}

/// [(lambda, X), (lambda', Y)] = (-s(X, Y), [X, Y]).
inline AlgebraElement central_bracket(const AlgebraElement& a, const AlgebraElement& b) {
  return {-schwinger(a.x, b.x), commutator(a.x, b.x)};
}

inline Complex pairing(const ExtendedPoint& p, const AlgebraElement& a) {
  return p.gamma * a.lambda + pairing(p.mu, a.x);
}

/// ad*_{(lambda, X)} (gamma, mu) = (0, -[X, mu] - gamma (X+- - X-+)).
inline ExtendedPoint coad_action(const AlgebraElement& a, const ExtendedPoint& p) {
  BlockOperator out = -commutator(a.x, p.mu);
  out.pm() -= p.gamma * a.x.pm();
  out.mp() += p.gamma * a.x.mp();
  return {Complex(0.0), std::move(out)};
}

/// Ad*_A (gamma, mu) = (gamma, A^-1 mu A + gamma (P+ - A^-1 P+ A)).
inline ExtendedPoint group_coad(const BlockOperator& a, const ExtendedPoint& p) {
  a.check_same(p.mu, "group_coad");
  const Matrix inv = checked_inverse(a.full(), "group element A");
  const BlockOperator pplus = projector_p_plus(a.dims());
  Matrix mu = inv * p.mu.full() * a.full();
  mu += p.gamma * (pplus.full() - inv * pplus.full() * a.full());
  return {p.gamma, BlockOperator(a.dims(), std::move(mu))};
}

/// Ad_A (lambda, X) = (lambda + Tr((P+ - A^-1 P+ A) X), A X A^-1); dual to group_coad.
inline AlgebraElement central_adjoint(const BlockOperator& a, const AlgebraElement& e) {
  a.check_same(e.x, "central_adjoint");
  const Matrix inv = checked_inverse(a.full(), "group element A");
  const Matrix pplus = projector_p_plus(a.dims()).full();
  const Complex shift = ((pplus - inv * pplus * a.full()) * e.x.full()).trace();
  return {e.lambda + shift, BlockOperator(a.dims(), a.full() * e.x.full() * inv)};
}

/// {F, G}_1 = <mu, [D2 F, D2 G]>.
inline Complex lie_poisson_part(const BlockOperator& df, const BlockOperator& dg,
                                const ExtendedPoint& p) {
  return pairing(p.mu, commutator(df, dg));
}

/// {F, G}_2 = -gamma s(D2 F, D2 G).
inline Complex cocycle_part(const BlockOperator& df, const BlockOperator& dg,
                            const ExtendedPoint& p) {
  return -p.gamma * schwinger(df, dg);
}

/// Pencil {F, G}_eps = {F, G}_1 + eps {F, G}_2 from precomputed gradients.
inline Complex poisson_bracket(const Gradient& df, const Gradient& dg, const ExtendedPoint& p,
                               double epsilon = 1.0) {
  return lie_poisson_part(df.d_mu, dg.d_mu, p) + epsilon * cocycle_part(df.d_mu, dg.d_mu, p);
}

inline Complex poisson_bracket(const GradientProvider& f, const GradientProvider& g,
                               const ExtendedPoint& p, double epsilon = 1.0) {
  return poisson_bracket(f(p), g(p), p, epsilon);
}

/// d mu/dt = -[mu, X] + gamma [P+, X] for a Hamiltonian with D2 h = X.
inline BlockOperator hamilton_rhs(const BlockOperator& d_mu, const ExtendedPoint& p) {
  BlockOperator out = commutator(d_mu, p.mu);
  out += p.gamma * commutator_p_plus(d_mu);
  return out;
}

inline constexpr double kDefaultGradientStep = 1e-5;

/// Central differences along every real and imaginary coordinate direction.
/// Returns the Wirtinger derivative, so for holomorphic fields D2 f satisfies
/// df = Tr_res(d mu D2 f) + D1 f d gamma.
inline Gradient numeric_gradient(const ScalarField& f, const ExtendedPoint& p,
                                 double step = kDefaultGradientStep) {
  if (!(step > 0.0)) throw InvalidArgument("numeric_gradient: step must be positive");
  auto checked = [&](const ExtendedPoint& q) {
    const Complex v = f(q);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw NumericalFailure("numeric_gradient: scalar field returned a non-finite value");
    }
    return v;
  };
  auto wirtinger = [&](auto&& perturb) {
    Complex along[2];
    const Complex dirs[2] = {Complex(1.0, 0.0), Complex(0.0, 1.0)};
    for (int r = 0; r < 2; ++r) {
      ExtendedPoint plus = p;
      ExtendedPoint minus = p;
      perturb(plus, step * dirs[r]);
      perturb(minus, -step * dirs[r]);
      along[r] = (checked(plus) - checked(minus)) / (2.0 * step);
    }
    return 0.5 * (along[0] - kI * along[1]);
  };

  Gradient g;
  g.d_gamma = wirtinger([](ExtendedPoint& q, Complex h) { q.gamma += h; });
  g.d_mu = BlockOperator(p.dims());
  const int n = p.dims().total();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // Tr(E_ij X) = X_ji.
      g.d_mu.full()(j, i) =
          wirtinger([i, j](ExtendedPoint& q, Complex h) { q.mu.full()(i, j) += h; });
    }
  }
  return g;
}

}  // namespace resgr
