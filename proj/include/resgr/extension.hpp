#pragma once

// Finite-dimensional model of the extension L1+ (+) gl_res and its central quotient.

#include <functional>

#include "resgr/lie_poisson.hpp"
#include "resgr/linalg.hpp"

namespace resgr {

/// Element (n, A) of GL1+ x_{Phi,Omega} GL_res, valid near the identity.
struct LocalGroupElement {
  Matrix n;
  BlockOperator a;
};

/// (rho, X) in L1+ (+) gl_res.
struct ExtendedAlgebraElement {
  Matrix rho;
  BlockOperator x;
};

/// (tau, mu) in the predual L0+ (+) L1_res.
struct ExtendedCovector {
  Matrix tau;
  BlockOperator mu;
};

namespace detail {

inline void check_plus(const Matrix& m, const Dims& d, const char* where) {
  if (m.rows() != d.n_plus || m.cols() != d.n_plus) {
    throw DimensionMismatch(std::string(where) + ": expected an n+ x n+ matrix");
  }
}

inline BlockOperator embed_plus(const Matrix& m, const Dims& d) {
  BlockOperator out(d);
  out.pp() = m;
  return out;
}

}  // namespace detail

inline LocalGroupElement group_identity(const Dims& d) {
  return {Matrix::Identity(d.n_plus, d.n_plus), BlockOperator::identity(d)};
}

/// (exp(rho), exp(X)).
inline LocalGroupElement group_exp(const ExtendedAlgebraElement& e) {
  detail::check_plus(e.rho, e.x.dims(), "group_exp");
  return {expm(e.rho), expm(e.x)};
}

/// Phi(A)(n) = A++ n A++^{-1}.
inline Matrix phi_map(const BlockOperator& a, const Matrix& n) {
  detail::check_plus(n, a.dims(), "phi_map");
  const Matrix app = a.pp();
  return app * n * checked_inverse(app, "A++");
}

/// Omega(A1, A2) = A1++ A2++ (A1 A2)++^{-1}.
inline Matrix omega_map(const BlockOperator& a1, const BlockOperator& a2) {
  a1.check_same(a2, "omega_map");
  const BlockOperator prod = a1 * a2;
  checked_inverse(Matrix(a1.pp()), "A1++");
  checked_inverse(Matrix(a2.pp()), "A2++");
  return a1.pp() * a2.pp() * checked_inverse(Matrix(prod.pp()), "(A1 A2)++");
}

/// (n1, A1)(n2, A2) = (n1 Phi(A1)(n2) Omega(A1, A2), A1 A2).
inline LocalGroupElement multiply(const LocalGroupElement& g1, const LocalGroupElement& g2) {
  return {g1.n * phi_map(g1.a, g2.n) * omega_map(g1.a, g2.a), g1.a * g2.a};
}

/// Ad_(n,A)(rho, X) = (n A++ (rho + X++) A++^{-1} n^{-1} - (A X A^{-1})++, A X A^{-1}).
inline ExtendedAlgebraElement extended_adjoint(const LocalGroupElement& g,
                                               const ExtendedAlgebraElement& e) {
  g.a.check_same(e.x, "extended_adjoint");
  detail::check_plus(e.rho, e.x.dims(), "extended_adjoint");
  const Matrix app = g.a.pp();
  const Matrix c = g.n * app;
  const Matrix ci = checked_inverse(app, "A++") * checked_inverse(g.n, "n");
  const BlockOperator ax(e.x.dims(), g.a.full() * e.x.full() * checked_inverse(g.a.full(), "A"));
  return {c * (e.rho + e.x.pp()) * ci - ax.pp(), ax};
}

/// phi(X)(rho) = [X++, rho].
inline Matrix phi_alg(const BlockOperator& x, const Matrix& rho) {
  detail::check_plus(rho, x.dims(), "phi_alg");
  return x.pp() * rho - rho * x.pp();
}

/// omega(X, Y) = -X+- Y-+ + Y+- X-+.
inline Matrix omega_alg(const BlockOperator& x, const BlockOperator& y) {
  x.check_same(y, "omega_alg");
  return -x.pm() * y.mp() + y.pm() * x.mp();
}

/// Cocycle of the central quotient: -s(X, Y).
inline Complex tilde_omega(const BlockOperator& x, const BlockOperator& y) {
  return -schwinger(x, y);
}

inline ExtendedAlgebraElement extended_bracket(const ExtendedAlgebraElement& e1,
                                               const ExtendedAlgebraElement& e2) {
  e1.x.check_same(e2.x, "extended_bracket");
  const Matrix rr = e1.rho * e2.rho - e2.rho * e1.rho;
  return {rr + phi_alg(e1.x, e2.rho) - phi_alg(e2.x, e1.rho) + omega_alg(e1.x, e2.x),
          commutator(e1.x, e2.x)};
}

/// <(tau, mu), (rho, X)> = Tr(tau rho) + Tr_res(mu X).
inline Complex extended_pairing(const ExtendedCovector& m, const ExtendedAlgebraElement& e) {
  return (m.tau * e.rho).trace() + pairing(m.mu, e.x);
}

/// Ad*_(n,A)(tau, mu) = (s, s - A^{-1} tau A + A^{-1} mu A) with s = A++^{-1} n^{-1} tau n A++,
/// tau and s placed in the ++ block of the second component.  Dual to extended_adjoint.
inline ExtendedCovector extended_coadjoint(const LocalGroupElement& g, const ExtendedCovector& m) {
  g.a.check_same(m.mu, "extended_coadjoint");
  const Dims d = m.mu.dims();
  detail::check_plus(m.tau, d, "extended_coadjoint");
  const Matrix app = g.a.pp();
  const Matrix s = checked_inverse(app, "A++") * checked_inverse(g.n, "n") * m.tau * g.n * app;
  const Matrix inv = checked_inverse(g.a.full(), "A");
  const Matrix tau_full = detail::embed_plus(m.tau, d).full();
  BlockOperator mu(d, inv * (m.mu.full() - tau_full) * g.a.full());
  mu.pp() += s;
  return {s, mu};
}

/// ad*_(rho,X)(tau, mu) = ([-rho, tau] - [X++, tau], -[X, mu] - [rho, tau] - tau X+- + X-+ tau).
inline ExtendedCovector extended_coad_algebra(const ExtendedAlgebraElement& e,
                                              const ExtendedCovector& m) {
  e.x.check_same(m.mu, "extended_coad_algebra");
  const Matrix rt = e.rho * m.tau - m.tau * e.rho;
  const Matrix xt = e.x.pp() * m.tau - m.tau * e.x.pp();
  BlockOperator mu = -commutator(e.x, m.mu);
  mu.pp() -= rt;
  mu.pm() -= m.tau * e.x.pm();
  mu.mp() += e.x.mp() * m.tau;
  return {-rt - xt, mu};
}

/// Tr_1: (rho, X) -> (Tr rho, X), the map onto the central quotient C (+) gl_res.
inline AlgebraElement central_quotient(const ExtendedAlgebraElement& e) {
  return {e.rho.trace(), e.x};
}

/// Largest entry of the four group conditions on Phi and Omega at (A1, A2, A3) and n.
inline double group_condition_residual(const BlockOperator& a1, const BlockOperator& a2,
                                       const BlockOperator& a3, const Matrix& n) {
  const Dims d = a1.dims();
  const BlockOperator id = BlockOperator::identity(d);
  const Matrix one = Matrix::Identity(d.n_plus, d.n_plus);
  double r = (phi_map(id, n) - n).cwiseAbs().maxCoeff();
  r = std::max(r, (omega_map(id, a1) - one).cwiseAbs().maxCoeff());
  r = std::max(r, (omega_map(a1, id) - one).cwiseAbs().maxCoeff());
  const Matrix lhs3 = omega_map(a1, a2) * omega_map(a1 * a2, a3);
  const Matrix rhs3 = phi_map(a1, omega_map(a2, a3)) * omega_map(a1, a2 * a3);
  r = std::max(r, (lhs3 - rhs3).cwiseAbs().maxCoeff());
  const Matrix lhs4 = omega_map(a1, a2) * phi_map(a1 * a2, n);
  const Matrix rhs4 = phi_map(a1, phi_map(a2, n)) * omega_map(a1, a2);
  return std::max(r, (lhs4 - rhs4).cwiseAbs().maxCoeff());
}

/// Cyclic cocycle condition for (phi, omega):
/// sum_cyc omega([X,Y],Z) - sum_cyc phi(X)(omega(Y,Z)).
inline Matrix omega_condition(const BlockOperator& x, const BlockOperator& y,
                              const BlockOperator& z) {
  return omega_alg(commutator(x, y), z) + omega_alg(commutator(y, z), x) +
         omega_alg(commutator(z, x), y) - phi_alg(x, omega_alg(y, z)) -
         phi_alg(y, omega_alg(z, x)) - phi_alg(z, omega_alg(x, y));
}

/// ad_{omega(X,Y)} + phi([X,Y]) - [phi(X), phi(Y)] applied to rho.
inline Matrix phi_condition(const BlockOperator& x, const BlockOperator& y, const Matrix& rho) {
  const Matrix w = omega_alg(x, y);
  return (w * rho - rho * w) + phi_alg(commutator(x, y), rho) -
         (phi_alg(x, phi_alg(y, rho)) - phi_alg(y, phi_alg(x, rho)));
}

/// Central second difference of f at (0, 0): d^2 f / ds dt.
template <class F>
auto mixed_derivative(const F& f, double h) -> decltype(f(h, h)) {
  return (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
}

/// Central first difference of f at 0.
template <class F>
auto derivative(const F& f, double h) -> decltype(f(h)) {
  return (f(h) - f(-h)) / (2.0 * h);
}

}  // namespace resgr
