#pragma once

// Reference solutions: Grassmannian leaf, the n+ = 1 vector case, and the
// 4-dimensional real-form case of the cubic flow.

#include <array>
#include <map>
#include <vector>

#include <Eigen/QR>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/Polynomials>

#include "resgr/integrators.hpp"

namespace resgr {

// ---------------------------------------------------------------------------
// Grassmannian

inline constexpr double kRankThreshold = 1e-10;

/// Orthogonal projector onto the column span of `basis`.
inline Matrix span_projector(const Matrix& basis) {
  Eigen::ColPivHouseholderQR<Matrix> qr(basis);
  const auto& r = qr.matrixR();
  const double r00 = std::abs(r(0, 0));
  for (Eigen::Index i = 0; i < basis.cols(); ++i) {
    if (!(std::abs(r(i, i)) > kRankThreshold * r00)) {
      throw InvalidArgument("grassmann_embed: basis is rank deficient");
    }
  }
  const Matrix q = qr.householderQ() * Matrix::Identity(basis.rows(), basis.cols());
  return q * q.adjoint();
}

/// iota_gamma(W) = (gamma, gamma (P+ - P_W)) for W spanned by the n+ columns of `basis`.
inline ExtendedPoint grassmann_embed(Complex gamma, const Matrix& basis, const Dims& dims) {
  if (basis.rows() != dims.total() || basis.cols() != dims.n_plus) {
    throw DimensionMismatch("grassmann_embed: basis must be (n+ + n-) x n+");
  }
  const BlockOperator pw(dims, span_projector(basis));
  return {gamma, gamma * (projector_p_plus(dims) - pw)};
}

/// Basis (1; z) of the graph of z: H+ -> H-.
inline Matrix graph_basis(const Matrix& z) {
  Matrix b(z.rows() + z.cols(), z.cols());
  b << Matrix::Identity(z.cols(), z.cols()), z;
  return b;
}

/// The z-coordinate display ((1+z^+z)^-1 - 1, (1+z^+z)^-1 z^+; z(1+z^+z)^-1, z(1+z^+z)^-1 z^+),
/// which equals P_W - P+ = -mu/gamma.
inline BlockOperator grassmann_display(const Matrix& z, const Dims& dims) {
  if (z.rows() != dims.n_minus || z.cols() != dims.n_plus) {
    throw DimensionMismatch("grassmann_display: z must be n- x n+");
  }
  const Matrix g = checked_inverse(Matrix(Matrix::Identity(dims.n_plus, dims.n_plus) +
                                          z.adjoint() * z),
                                   "1 + z^+ z");
  return BlockOperator::from_blocks(dims, g - Matrix::Identity(dims.n_plus, dims.n_plus),
                                    g * z.adjoint(), z * g, z * g * z.adjoint());
}

inline constexpr double kProjectorTolerance = 1e-6;

/// z = beta alpha^-1 recovered from a point on the orbit of (gamma, 0).
inline Matrix grassmann_z(const ExtendedPoint& p) {
  if (std::abs(p.gamma) == 0.0) throw InvalidArgument("grassmann_z: gamma must be nonzero");
  const BlockOperator pw = projector_p_plus(p.dims()) - (1.0 / p.gamma) * p.mu;
  if ((pw.full() * pw.full() - pw.full()).norm() > kProjectorTolerance) {
    throw InvalidArgument("grassmann_z: point is not on a Grassmannian orbit");
  }
  const Matrix alpha_inv = checked_inverse(Matrix(pw.pp()), "alpha block");
  return pw.mp() * alpha_inv;
}

inline std::vector<double> zz_spectrum(const ExtendedPoint& p) {
  const Matrix z = grassmann_z(p);
  Eigen::SelfAdjointEigenSolver<Matrix> es(z.adjoint() * z, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

/// Largest displacement of the sorted spectrum of z^+ z along a trajectory.
inline double grassmann_zz_invariance(const Trajectory& traj) {
  if (traj.points.empty()) return 0.0;
  const auto s0 = zz_spectrum(traj.points.front());
  double worst = 0.0;
  for (std::size_t i = 1; i < traj.points.size(); ++i) {
    const auto s = zz_spectrum(traj.points[i]);
    for (std::size_t j = 0; j < s.size(); ++j) worst = std::max(worst, std::abs(s[j] - s0[j]));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Vector case, n+ = 1: mu = (a, v^+; w, A)

struct VectorCaseState {
  Complex a{0.0, 0.0};
  Vector v;
  Vector w;
  Matrix big_a;
};

inline ExtendedPoint vector_case_point(const VectorCaseState& s, Complex gamma) {
  const auto m = static_cast<int>(s.w.size());
  if (s.v.size() != m || s.big_a.rows() != m || s.big_a.cols() != m || m < 1) {
    throw DimensionMismatch("VectorCaseState: inconsistent sizes");
  }
  Matrix pp(1, 1);
  pp(0, 0) = s.a;
  return {gamma, BlockOperator::from_blocks(Dims(1, m), pp, s.v.adjoint(), s.w, s.big_a)};
}

inline VectorCaseState vector_case_state(const ExtendedPoint& p) {
  if (p.dims().n_plus != 1) throw DimensionMismatch("vector case requires n+ = 1");
  return {p.mu.pp()(0, 0), p.mu.pm().adjoint(), p.mu.mp(), p.mu.mm()};
}

/// M_k = sum_{j=0}^{k-1} (mu^{k-1-j})_{++} A^j, so that (mu^k)_{-+} = M_k w and (mu^k)_{+-} = v^+ M_k.
inline Matrix vector_case_m(int k, const ExtendedPoint& p) {
  if (k < 1) throw IndexOutOfRange("vector_case_m: k must be >= 1");
  const auto s = vector_case_state(p);
  const auto m = s.big_a.rows();
  std::vector<Complex> plus(static_cast<std::size_t>(k));
  BlockOperator pw = BlockOperator::identity(p.dims());
  for (int j = 0; j < k; ++j) {
    plus[static_cast<std::size_t>(j)] = pw.pp()(0, 0);
    pw = pw * p.mu;
  }
  Matrix out = Matrix::Zero(m, m);
  Matrix apow = Matrix::Identity(m, m);
  for (int j = 0; j < k; ++j) {
    out += plus[static_cast<std::size_t>(k - 1 - j)] * apow;
    apow = apow * s.big_a;
  }
  return out;
}

/// Joint solution of the tau_0^k flows: w = exp(gamma sum M_k tau_k) w0,
/// v = exp(-conj(gamma) sum M_k^+ tau_k) v0; a and A do not move.
inline VectorCaseState vector_case_solution(const VectorCaseState& s0, Complex gamma,
                                            const std::map<int, double>& times) {
  const ExtendedPoint p0 = vector_case_point(s0, gamma);
  const auto m = s0.big_a.rows();
  Matrix gen = Matrix::Zero(m, m);
  for (const auto& [k, tau] : times) gen += tau * vector_case_m(k, p0);
  VectorCaseState out = s0;
  out.w = expm(Matrix(gamma * gen)) * s0.w;
  out.v = expm(Matrix(-std::conj(gamma) * gen.adjoint())) * s0.v;
  return out;
}

// ---------------------------------------------------------------------------
// 4-dimensional case: gamma = i chi, mu = i (A, Z; Z^+, D), A = diag(a1, a2),
// D = diag(d1, d2), Z = (a, b; c, d)

struct FourDimState {
  double chi = 1.0;
  double a1 = 0.0, a2 = 0.0, d1 = 0.0, d2 = 0.0;
  Complex a{0.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{0.0, 0.0};

  [[nodiscard]] bool generic() const { return a1 != a2 && d1 != d2; }
};

inline ExtendedPoint four_dim_point(const FourDimState& s) {
  const Dims dims(2, 2);
  Matrix m(4, 4);
  m << s.a1, 0.0, s.a, s.b,
       0.0, s.a2, s.c, s.d,
       std::conj(s.a), std::conj(s.c), s.d1, 0.0,
       std::conj(s.b), std::conj(s.d), 0.0, s.d2;
  return {Complex(0.0, s.chi), BlockOperator(dims, kI * m)};
}

/// Inverse of four_dim_point; the diagonal blocks must be diagonal and the point real form.
inline FourDimState four_dim_state(const ExtendedPoint& p, double tol = 1e-9) {
  if (!(p.dims() == Dims(2, 2))) throw DimensionMismatch("four_dim_state needs dims (2,2)");
  if (!is_real_form(p, tol)) throw InvalidArgument("four_dim_state needs a real-form point");
  const Matrix m = -kI * p.mu.full();
  if (std::abs(m(0, 1)) > tol || std::abs(m(2, 3)) > tol) {
    throw InvalidArgument("four_dim_state: A and D must be diagonal");
  }
  FourDimState s;
  s.chi = p.gamma.imag();
  s.a1 = m(0, 0).real();
  s.a2 = m(1, 1).real();
  s.d1 = m(2, 2).real();
  s.d2 = m(3, 3).real();
  s.a = m(0, 2);
  s.b = m(0, 3);
  s.c = m(1, 2);
  s.d = m(1, 3);
  return s;
}

/// Coefficients c[0] + c[1] x + c[2] x^2 + ...
using Poly = std::vector<double>;

namespace detail {

inline Poly poly_mul(const Poly& p, const Poly& q) {
  Poly r(p.size() + q.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  return r;
}

inline Poly poly_add(Poly p, const Poly& q, double s = 1.0) {
  if (q.size() > p.size()) p.resize(q.size(), 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) p[i] += s * q[i];
  return p;
}

inline Poly poly_trim(Poly p, double tol) {
  while (p.size() > 1 && std::abs(p.back()) <= tol) p.pop_back();
  return p;
}

}  // namespace detail

inline double poly_eval(const Poly& p, double x) {
  double r = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) r = r * x + *it;
  return r;
}

inline Poly poly_derivative(const Poly& p) {
  if (p.size() <= 1) return {0.0};
  Poly r(p.size() - 1);
  for (std::size_t i = 1; i < p.size(); ++i) r[i - 1] = static_cast<double>(i) * p[i];
  return r;
}

struct FourDimInvariants {
  double p2 = 0.0, q2 = 0.0, r2 = 0.0, s2 = 0.0;
  double delta = 0.0;
  double x = 0.0;
  Poly v;  ///< 2 Re(a conj(b) conj(c) d) as a function of x
  Poly w;  ///< 4 x (p^2-x)(q^2-x)(r^2-q^2+x) - v(x)^2, cubic
};

inline FourDimInvariants four_dim_invariants(const FourDimState& s) {
  using detail::poly_add;
  using detail::poly_mul;
  FourDimInvariants out;
  const double aa = std::norm(s.a), bb = std::norm(s.b), cc = std::norm(s.c), dd = std::norm(s.d);
  out.p2 = aa + bb;
  out.q2 = aa + cc;
  out.r2 = cc + dd;
  out.s2 = bb + dd;
  out.x = aa;
  const double cross = 2.0 * (s.a * std::conj(s.b) * std::conj(s.c) * s.d).real();
  out.delta = aa * s.a1 * s.d1 + bb * s.a1 * s.d2 + cc * s.a2 * s.d1 + dd * s.a2 * s.d2 + aa * cc +
              bb * dd + cross;
  // |a|^2 = x, |b|^2 = p^2 - x, |c|^2 = q^2 - x, |d|^2 = r^2 - q^2 + x
  const Poly xa{0.0, 1.0};
  const Poly xb{out.p2, -1.0};
  const Poly xc{out.q2, -1.0};
  const Poly xd{out.r2 - out.q2, 1.0};
  Poly rest = poly_add(poly_add(poly_add(poly_mul({s.a1 * s.d1}, xa), poly_mul({s.a1 * s.d2}, xb)),
                                poly_mul({s.a2 * s.d1}, xc)),
                       poly_mul({s.a2 * s.d2}, xd));
  rest = poly_add(poly_add(rest, poly_mul(xa, xc)), poly_mul(xb, xd));
  out.v = poly_add({out.delta}, rest, -1.0);
  const Poly quartic = poly_mul(poly_mul(poly_mul({4.0}, xa), poly_mul(xb, xc)), xd);
  out.w = detail::poly_trim(poly_add(quartic, poly_mul(out.v, out.v), -1.0), 1e-12);
  return out;
}

/// 2 chi Im(a conj(b) conj(c) d), the rate of |a|^2.
inline double four_dim_xdot(const FourDimState& s) {
  return 2.0 * s.chi * (s.a * std::conj(s.b) * std::conj(s.c) * s.d).imag();
}

/// Roots x_lo <= x0 <= x_hi of w bracketing the current value of x.
inline std::pair<double, double> four_dim_turning_points(const FourDimInvariants& inv) {
  const Poly& w = inv.w;
  if (w.size() < 3) throw NumericalFailure("four_dim: w(x) is degenerate");
  Eigen::VectorXd coeffs(static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i) coeffs(static_cast<Eigen::Index>(i)) = w[i];
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(coeffs);
  std::vector<double> real_roots;
  for (Eigen::Index i = 0; i < solver.roots().size(); ++i) {
    const auto r = solver.roots()(i);
    if (std::abs(r.imag()) <= 1e-9 * (1.0 + std::abs(r.real()))) real_roots.push_back(r.real());
  }
  std::sort(real_roots.begin(), real_roots.end());
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (double r : real_roots) {
    if (r <= inv.x + 1e-12 && r > lo) lo = r;
    if (r >= inv.x - 1e-12 && r < hi) hi = r;
  }
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
    throw NumericalFailure("four_dim: no bounded oscillation interval for x");
  }
  return {lo, hi};
}

/// Period of x(t): T = 2 int_{x_lo}^{x_hi} dx / (|chi| sqrt w(x)), with x = m + h sin(theta).
inline double four_dim_quasi_period(const FourDimState& s) {
  if (s.chi == 0.0) throw InvalidArgument("four_dim_quasi_period: chi must be nonzero");
  const auto inv = four_dim_invariants(s);
  const auto [lo, hi] = four_dim_turning_points(inv);
  const double m = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  auto integrand = [&](double theta) {
    const double x = m + h * std::sin(theta);
    // w(x) / ((x - lo)(hi - x)) evaluated by synthetic division keeps the integrand smooth.
    const double denom = (x - lo) * (hi - x);
    double g;
    if (denom > 1e-10 * h * h) {
      g = poly_eval(inv.w, x) / denom;
    } else {
      const Poly& w = inv.w;  // cubic: w = c3 (x - lo)(x - hi)(x - r3)
      const double c3 = w.back();
      const double r3 = -w[2] / c3 - lo - hi;
      g = -c3 * (x - r3);
    }
    if (!(g > 0.0)) throw NumericalFailure("four_dim_quasi_period: w changes sign inside the interval");
    return 1.0 / std::sqrt(g);
  };
  double err = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, -M_PI / 2.0, M_PI / 2.0, 15, 1e-13, &err);
  if (!std::isfinite(integral)) throw NumericalFailure("four_dim_quasi_period: quadrature failed");
  return 2.0 * integral / std::abs(s.chi);
}

/// Evolution by the reduced system: x'' = chi^2 w'(x) / 2 (smooth through turning points)
/// together with the phase equations; a, b, c, d are rebuilt from the conserved moduli.
inline FourDimState four_dim_evolve(const FourDimState& s0, double t) {
  if (!s0.generic()) throw InvalidArgument("four_dim_evolve: needs a1 != a2 and d1 != d2");
  const auto inv = four_dim_invariants(s0);
  if (poly_eval(inv.w, inv.x) < -1e-12) throw NumericalFailure("four_dim_evolve: w(x0) < 0");
  if (t == 0.0) return s0;
  const Poly dw = poly_derivative(inv.w);
  const double chi = s0.chi;
  const double p2 = inv.p2, q2 = inv.q2, r2 = inv.r2;
  const double ka = s0.a1 * s0.a1 + s0.a1 * s0.d1 + s0.d1 * s0.d1;
  const double kb = s0.a1 * s0.a1 + s0.a1 * s0.d2 + s0.d2 * s0.d2;
  const double kc = s0.a2 * s0.a2 + s0.a2 * s0.d1 + s0.d1 * s0.d1;
  const double kd = s0.a2 * s0.a2 + s0.a2 * s0.d2 + s0.d2 * s0.d2;

  using State = std::array<double, 6>;  // x, x', alpha, beta, gamma, delta
  auto rhs = [&](const State& y, State& dy, double) {
    const double x = y[0];
    const double v = poly_eval(inv.v, x);
    dy[0] = y[1];
    dy[1] = 0.5 * chi * chi * poly_eval(dw, x);
    dy[2] = chi * (ka + p2 + q2 - x + v / (2.0 * x));
    dy[3] = chi * (kb + p2 + r2 - q2 + x + v / (2.0 * (p2 - x)));
    dy[4] = chi * (kc + r2 + x + v / (2.0 * (q2 - x)));
    dy[5] = chi * (kd + p2 + r2 - x + v / (2.0 * (r2 - q2 + x)));
  };
  State y{inv.x, four_dim_xdot(s0), std::arg(s0.a), std::arg(s0.b), std::arg(s0.c), std::arg(s0.d)};
  namespace odeint = boost::numeric::odeint;
  auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>());
  odeint::integrate_adaptive(stepper, rhs, y, 0.0, t, std::copysign(1e-3, t));
  for (double v : y) {
    if (!std::isfinite(v)) throw NumericalFailure("four_dim_evolve: integration diverged");
  }
  const double x = y[0];
  auto modulus = [](double m2) { return std::sqrt(std::max(m2, 0.0)); };
  FourDimState out = s0;
  out.a = std::polar(modulus(x), y[2]);
  out.b = std::polar(modulus(p2 - x), y[3]);
  out.c = std::polar(modulus(q2 - x), y[4]);
  out.d = std::polar(modulus(r2 - q2 + x), y[5]);
  return out;
}

}  // namespace resgr
