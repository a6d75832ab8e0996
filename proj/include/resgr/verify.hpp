#pragma once

// Named property suites run by `resgr verify`.

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "resgr/extension.hpp"
#include "resgr/integrators.hpp"
#include "resgr/oracles.hpp"
#include "resgr/rng.hpp"

namespace resgr {

struct Check {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  [[nodiscard]] bool pass() const { return residual <= tolerance; }
};

struct VerifyReport {
  std::string suite;
  std::vector<Check> checks;
  Dims dims{2, 3};
  std::uint64_t seed = 0;
  [[nodiscard]] bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); });
  }
};

namespace suites {

inline double maxabs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double gap(const BlockOperator& a, const BlockOperator& b) {
  return maxabs(a.full() - b.full());
}

inline std::vector<Check> core(Rng& rng, const Dims& d) {
  double cyclic = 0.0, conj = 0.0, submult = 0.0, pair = 0.0, spec = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto a = rng.op(d), b = rng.op(d);
    cyclic = std::max(cyclic, std::abs(restricted_trace(a * b) - restricted_trace(b * a)));
    const BlockOperator g = BlockOperator::identity(d) + rng.op(d, 0.3);
    const BlockOperator gi = checked_inverse(g);
    conj = std::max(conj, std::abs(restricted_trace(g * a * gi) - restricted_trace(a)));
    submult = std::max(submult, star_norm(a * b) - star_norm(a) * star_norm(b));
    pair = std::max(pair, std::abs(pairing(a, b) - (a.full() * b.full()).trace()));
    const ExtendedPoint p{rng.complex(), a};
    spec = std::max(spec, spectrum_distance(spectrum_shifted(p), spectrum_shifted(group_coad(g, p))));
  }
  return {{"restricted trace cyclic", cyclic, 1e-12},
          {"restricted trace conjugation invariant", conj, 1e-10},
          {"star norm submultiplicative", std::max(0.0, submult), 1e-12},
          {"pairing equals trace of product", pair, 1e-12},
          {"spectrum of mu - gamma P+ invariant under Ad*", spec, 1e-9}};
}

inline std::vector<Check> poisson(Rng& rng, const Dims& d) {
  double jacobi = 0.0, duality = 0.0, deriv = 0.0, antisym = 0.0, hamilton = 0.0;
  for (int i = 0; i < 10; ++i) {
    const AlgebraElement a{rng.complex(), rng.op(d)}, b{rng.complex(), rng.op(d)},
        c{rng.complex(), rng.op(d)};
    const auto j1 = central_bracket(a, central_bracket(b, c));
    const auto j2 = central_bracket(b, central_bracket(c, a));
    const auto j3 = central_bracket(c, central_bracket(a, b));
    jacobi = std::max({jacobi, std::abs(j1.lambda + j2.lambda + j3.lambda),
                       gap(j1.x + j2.x, -1.0 * j3.x)});
    const auto p = rng.point(d);
    const Complex lhs = pairing(coad_action(a, p), b);
    duality = std::max(duality, std::abs(lhs - pairing(p, central_bracket(a, b))));
    const double h = 1e-5;
    const auto plus = group_coad(expm(h * a.x), p), minus = group_coad(expm(-h * a.x), p);
    deriv = std::max(deriv, gap((1.0 / (2.0 * h)) * (plus.mu - minus.mu), coad_action(a, p).mu));
    const Gradient fa{0.0, a.x}, fb{0.0, b.x};
    antisym = std::max(antisym, std::abs(poisson_bracket(fa, fb, p, 1.0) +
                                         poisson_bracket(fb, fa, p, 1.0)));
    const Wbasis id{3, 1};
    hamilton = std::max(hamilton, gap(hamilton_rhs(grad_hamiltonian(id, p), p),
                                      flow_rhs(id, RhsForm::W_form, p)) /
                                      (1.0 + maxabs(flow_rhs(id, RhsForm::W_form, p).full())));
  }
  return {{"central bracket Jacobi", jacobi, 1e-11},
          {"coadjoint dual to bracket", duality, 1e-11},
          {"group coadjoint derivative is ad*", deriv, 1e-6},
          {"Poisson bracket antisymmetric", antisym, 1e-12},
          {"Hamilton equation matches W form", hamilton, 1e-10}};
}

inline std::vector<Check> hierarchy(Rng& rng, const Dims& d) {
  double prop1 = 0.0, comm = 0.0, forms = 0.0, tau = 0.0, series = 0.0;
  for (int i = 0; i < 5; ++i) {
    const auto p = rng.point(d);
    const double norm = std::max(1.0, operator_norm(p.mu.full()));
    const auto pp = projector_p_plus(d);
    for (int k = 1; k <= 8; ++k) {
      for (int l = 0; l < k; ++l) {
        const double r = gap(w_poly(k, k - l, p.mu), w_from_h(k, l, p.mu)) / std::pow(norm, l);
        prop1 = std::max(prop1, r);
      }
      for (int n = 0; n <= k + 1; ++n) {
        const auto c = commutator(p.mu, w_poly(k, n, p.mu)) + commutator(pp, w_poly(k, n - 1, p.mu));
        comm = std::max(comm, maxabs(c.full()) / std::pow(norm, k));
      }
    }
    for (int k = 1; k <= 5; ++k) {
      for (int n = 0; n <= k; ++n) {
        const Wbasis id{k, n};
        const auto w = flow_rhs(id, RhsForm::W_form, p);
        const double s = 1.0 + maxabs(w.full());
        forms = std::max({forms, gap(w, flow_rhs(id, RhsForm::MU_form, p)) / s,
                          gap(w, flow_rhs(id, RhsForm::PPLUS_form, p)) / s});
      }
    }
    for (int k = 2; k <= 6; ++k) tau = std::max(tau, tau_reparametrization_check(1, k, p).relative_residual);
    const Complex kappa(0.2, 0.05), lambda(0.3, -0.1);
    const double s = 0.4 / (std::abs(kappa) * (star_norm(p.mu) + std::abs(lambda * p.gamma)));
    const ExtendedPoint small{s * p.gamma, s * p.mu};
    const auto sv = generating_hamiltonian_series(kappa, lambda, small, 80);
    const Complex cf = generating_hamiltonian(kappa, lambda, small);
    series = std::max(series, std::abs(cf - sv.value) / std::max(1.0, std::abs(cf)));
  }
  return {{"W^k_{k-l} = sum p^l_n(k) H^l_n, k <= 8", prop1, 1e-9},
          {"[mu, W^k_n] + [P+, W^k_{n-1}] = 0", comm, 1e-10},
          {"W, mu and P+ forms of the flow agree", forms, 1e-10},
          {"tau reparametrization prefactor", tau, 1e-10},
          {"generating Hamiltonian closed form vs series", series, 1e-8}};
}

inline std::vector<Check> magri(Rng& rng, const Dims& d) {
  double invol = 0.0, chain = 0.0, ends = 0.0, gen = 0.0;
  for (int i = 0; i < 3; ++i) {
    const auto p = rng.point(d, 0.8);
    for (int k = 1; k <= 4; ++k)
      for (int n = 0; n <= k; ++n)
        for (int l = 1; l <= 4; ++l)
          for (int m = 0; m <= l; ++m)
            for (double eps : {0.0, 0.5, 1.0})
              invol = std::max(invol, std::abs(poisson_bracket(gradient_of(Wbasis{k, n}),
                                                               gradient_of(Wbasis{l, m}), p, eps)));
    const BlockOperator f = rng.op(d);
    for (int k = 1; k <= 5; ++k) {
      for (int n = 0; n < k; ++n) {
        const auto gn = grad_hamiltonian(Wbasis{k, n}, p);
        const auto gn1 = grad_hamiltonian(Wbasis{k, n + 1}, p);
        chain = std::max(chain, std::abs(lie_poisson_part(gn1, f, p) - cocycle_part(gn, f, p)));
      }
      ends = std::max({ends, std::abs(lie_poisson_part(grad_hamiltonian(Wbasis{k, 0}, p), f, p)),
                       std::abs(cocycle_part(grad_hamiltonian(Wbasis{k, k}, p), f, p))});
    }
    const Generating a{Complex(0.3, 0.1), Complex(0.5, -0.2)}, b{Complex(-0.2, 0.25), Complex(-0.4, 0.3)};
    const double s = 0.4 / (std::abs(a.kappa) * (star_norm(p.mu) + std::abs(a.lambda * p.gamma)));
    const ExtendedPoint small{s * p.gamma, s * p.mu};
    for (double eps : {0.0, 0.5, 1.0})
      gen = std::max(gen, std::abs(poisson_bracket(gradient_of(a), gradient_of(b), small, eps)));
  }
  return {{"involution {h^k_n, h^l_m}_eps, k,l <= 4", invol, 1e-10},
          {"chain {h_{n+1}, F}_1 = {h_n, F}_2", chain, 1e-9},
          {"chain ends {h_0, F}_1 = {h_k, F}_2 = 0", ends, 1e-9},
          {"generating Hamiltonians in involution", gen, 1e-8}};
}

inline std::vector<Check> oracles(Rng& rng) {
  const Dims g(2, 2);
  const auto p = grassmann_embed(Complex(0.0, 1.2), graph_basis(rng.matrix(2, 2, 0.7)), g);
  double zz = 0.0;
  for (int l : {1, 3}) {
    FlowSpec s;
    s.id = Hbasis{l, 0};
    s.form = RhsForm::REAL_form;
    s.real_form = true;
    s.dt = 1e-3;
    s.t_end = 1.0;
    s.record_every = 10;
    zz = std::max(zz, grassmann_zz_invariance(integrate(s, p)));
  }

  const Complex gamma(0.3, 0.8);
  const auto q = rng.point(Dims(1, 4), 0.5);
  const auto v0 = vector_case_state(q);
  FlowSpec h0;
  h0.id = Hbasis{2, 0};
  h0.form = RhsForm::H_form;
  h0.dt = 1e-3;
  h0.t_end = 1.0;
  h0.record_every = 100;
  const auto tr = integrate(h0, {gamma, q.mu});
  double vec = 0.0;
  for (std::size_t i = 0; i < tr.points.size(); ++i) {
    const auto o = vector_case_solution(v0, gamma, {{2, tr.times[i]}});
    const auto got = vector_case_state(tr.points[i]);
    vec = std::max({vec, maxabs(got.v - o.v), maxabs(got.w - o.w)});
  }

  FourDimState f;
  f.chi = 1.0;
  f.a1 = 0.3;
  f.a2 = -0.5;
  f.d1 = 0.7;
  f.d2 = -0.2;
  f.a = std::polar(0.5, 0.3);
  f.b = std::polar(0.6, -1.1);
  f.c = std::polar(0.45, 2.0);
  f.d = std::polar(0.55, 0.7);
  const double period = four_dim_quasi_period(f);
  FlowSpec cubic;
  cubic.id = Hbasis{3, 0};
  cubic.form = RhsForm::H_form;
  cubic.dt = 1e-3;
  cubic.t_end = period;
  cubic.record_every = 50;
  const auto t4 = integrate(cubic, four_dim_point(f));
  const auto inv0 = four_dim_invariants(f);
  double drift = 0.0, evolve = 0.0;
  for (std::size_t i = 0; i < t4.points.size(); ++i) {
    const auto st = four_dim_state(t4.points[i]);
    const auto inv = four_dim_invariants(st);
    drift = std::max({drift, std::abs(inv.p2 - inv0.p2), std::abs(inv.q2 - inv0.q2),
                      std::abs(inv.r2 - inv0.r2), std::abs(inv.s2 - inv0.s2),
                      std::abs(inv.delta - inv0.delta)});
    const auto e = four_dim_evolve(f, t4.times[i]);
    evolve = std::max({evolve, std::abs(e.a - st.a), std::abs(e.b - st.b), std::abs(e.c - st.c),
                       std::abs(e.d - st.d)});
  }
  return {{"Grassmann leaf: z+z spectrum conserved", zz, 1e-8},
          {"vector case: RK4 vs closed form", vec, 1e-6},
          {"4D case: p2, q2, r2, s2, Delta conserved", drift, 1e-8},
          {"4D case: quadrature vs RK4 over a quasi-period", evolve, 1e-5}};
}

inline std::vector<Check> extension(Rng& rng, const Dims& d) {
  auto element = [&](double s) {
    return ExtendedAlgebraElement{rng.matrix(d.n_plus, d.n_plus, s), rng.op(d, s)};
  };
  double group = 0.0, jacobi = 0.0, infinitesimal = 0.0, duality = 0.0, quotient = 0.0;
  for (int i = 0; i < 5; ++i) {
    const auto g1 = group_exp(element(0.1)), g2 = group_exp(element(0.1)), g3 = group_exp(element(0.1));
    group = std::max(group, group_condition_residual(g1.a, g2.a, g3.a, g1.n));
    const auto a = element(1.0), b = element(1.0), c = element(1.0);
    const auto j1 = extended_bracket(a, extended_bracket(b, c));
    const auto j2 = extended_bracket(b, extended_bracket(c, a));
    const auto j3 = extended_bracket(c, extended_bracket(a, b));
    jacobi = std::max({jacobi, maxabs(j1.rho + j2.rho + j3.rho),
                       maxabs(j1.x.full() + j2.x.full() + j3.x.full())});
    infinitesimal = std::max({infinitesimal, maxabs(omega_condition(a.x, b.x, c.x)),
                              maxabs(phi_condition(a.x, b.x, c.rho))});
    const ExtendedCovector m{rng.matrix(d.n_plus, d.n_plus), rng.op(d)};
    duality = std::max(duality, std::abs(extended_pairing(extended_coadjoint(g1, m), a) -
                                         extended_pairing(m, extended_adjoint(g1, a))));
    quotient = std::max(quotient, std::abs(central_quotient(extended_adjoint(g1, a)).lambda -
                                           central_adjoint(g1.a, central_quotient(a)).lambda));
  }
  const BlockOperator x = rng.op(d), y = rng.op(d);
  auto det_omega = [](const BlockOperator& u, const BlockOperator& v) {
    return [&u, &v](double s, double t) -> Complex {
      return omega_map(expm(s * u), expm(t * v)).determinant();
    };
  };
  const Complex fd = mixed_derivative(det_omega(x, y), 1e-4) - mixed_derivative(det_omega(y, x), 1e-4);
  const double schwinger_fd = std::abs(fd + schwinger(x, y));
  const auto a = element(1.0), e = element(1.0);
  const double h = 1e-5;
  const auto plus = extended_adjoint(group_exp({h * a.rho, h * a.x}), e);
  const auto minus = extended_adjoint(group_exp({-h * a.rho, -h * a.x}), e);
  const auto br = extended_bracket(a, e);
  const double adad = std::max(maxabs((plus.rho - minus.rho) / (2.0 * h) - br.rho),
                               maxabs((plus.x.full() - minus.x.full()) / (2.0 * h) - br.x.full()));
  return {{"group cocycle conditions near identity", group, 1e-10},
          {"det Omega mixed derivative equals -s(X, Y)", schwinger_fd, 1e-5},
          {"Ad derivative equals bracket", adad, 1e-5},
          {"extended bracket Jacobi", jacobi, 1e-11},
          {"infinitesimal conditions on phi and omega", infinitesimal, 1e-11},
          {"coadjoint dual to adjoint", duality, 1e-9},
          {"trace quotient intertwines adjoint actions", quotient, 1e-8}};
}

}  // namespace suites

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"core",    "poisson",   "hierarchy",
                                              "oracles", "extension", "magri"};
  return names;
}

/// Runs one named suite; unknown names throw InvalidArgument.
inline VerifyReport run_suite(const std::string& name, std::uint64_t seed = 1,
                              const Dims& dims = Dims(2, 3)) {
  Rng rng(seed);
  VerifyReport r{name, {}, dims, seed};
  if (name == "core") {
    r.checks = suites::core(rng, dims);
  } else if (name == "poisson") {
    r.checks = suites::poisson(rng, dims);
  } else if (name == "hierarchy") {
    r.checks = suites::hierarchy(rng, dims);
  } else if (name == "magri") {
    r.checks = suites::magri(rng, dims);
  } else if (name == "oracles") {
    r.checks = suites::oracles(rng);
  } else if (name == "extension") {
    r.checks = suites::extension(rng, dims);
  } else {
    throw InvalidArgument("unknown suite '" + name + "'");
  }
  return r;
}

}  // namespace resgr
