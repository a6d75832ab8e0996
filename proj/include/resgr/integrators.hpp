#pragma once

// Time steppers for the hierarchy flows and invariant monitoring.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "resgr/hierarchy.hpp"
#include "resgr/linalg.hpp"

namespace resgr {

enum class Integrator { RK4, LIE_EULER_CONJ };

inline std::string to_string(Integrator i) {
  return i == Integrator::RK4 ? "RK4" : "LIE_EULER_CONJ";
}

struct FlowSpec {
  HamiltonianId id = Wbasis{1, 0};
  RhsForm form = RhsForm::W_form;
  bool real_form = false;
  Integrator integrator = Integrator::RK4;
  double dt = 1e-3;
  double t_end = 1.0;
  int record_every = 1;
};

inline bool is_lax_form(const FlowSpec& s) {
  if (std::holds_alternative<Wbasis>(s.id)) {
    return s.form == RhsForm::W_form || s.form == RhsForm::MU_form;
  }
  return std::holds_alternative<Generating>(s.id) && s.form == RhsForm::W_form;
}

inline void validate(const FlowSpec& s) {
  validate(s.id);
  if (!(s.dt > 0.0) || !std::isfinite(s.dt)) throw InvalidArgument("FlowSpec: dt must be > 0");
  if (!(s.t_end >= 0.0) || !std::isfinite(s.t_end)) {
    throw InvalidArgument("FlowSpec: t_end must be >= 0");
  }
  if (s.t_end > 0.0 && s.dt > s.t_end) throw InvalidArgument("FlowSpec: dt exceeds t_end");
  if (s.record_every < 1) throw InvalidArgument("FlowSpec: record_every must be >= 1");
  if (s.integrator == Integrator::LIE_EULER_CONJ && !is_lax_form(s)) {
    throw InvalidArgument("FlowSpec: LIE_EULER_CONJ needs a Lax form (W_form or MU_form), got " +
                          to_string(s.form) + " for " + to_string(s.id));
  }
  if (s.form == RhsForm::REAL_form && !s.real_form) {
    throw InvalidArgument("FlowSpec: REAL_form requires real_form = true");
  }
}

inline void check_finite(const ExtendedPoint& p, const char* where) {
  if (!p.mu.all_finite()) throw NumericalFailure(std::string(where) + ": state became non-finite");
}

/// Classical fourth-order Runge-Kutta; gamma is copied, never updated.
inline ExtendedPoint rk4_step(const FlowSpec& s, const ExtendedPoint& p, double dt) {
  auto f = [&](const BlockOperator& mu) { return flow_rhs(s.id, s.form, {p.gamma, mu}); };
  const BlockOperator k1 = f(p.mu);
  const BlockOperator k2 = f(p.mu + (0.5 * dt) * k1);
  const BlockOperator k3 = f(p.mu + (0.5 * dt) * k2);
  const BlockOperator k4 = f(p.mu + dt * k3);
  ExtendedPoint out{p.gamma, p.mu + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)};
  check_finite(out, "rk4_step");
  return out;
}

inline ExtendedPoint rk4_step(const FlowSpec& s, const ExtendedPoint& p) {
  return rk4_step(s, p, s.dt);
}

/// B with d(state)/dt = [B, state]: state is mu - gamma P+ for W_form, mu for MU_form.
inline BlockOperator lax_generator(const FlowSpec& s, const ExtendedPoint& p) {
  if (const auto* w = std::get_if<Wbasis>(&s.id)) {
    const auto table = w_table(w->k, p.mu);
    const Complex pref = static_cast<double>(w->k + 1) * detail::ipow(p.gamma, w->n);
    if (s.form == RhsForm::W_form) return pref * table[w->n];
    BlockOperator b = table[w->n];
    if (w->n + 1 <= w->k) b += p.gamma * table[w->n + 1];
    return pref * b;
  }
  if (const auto* g = std::get_if<Generating>(&s.id); g && s.form == RhsForm::W_form) {
    return grad_generating(g->kappa, g->lambda, p);
  }
  throw InvalidArgument("lax_generator: not a Lax form");
}

/// state <- exp(dt B) state exp(-dt B) with B frozen at the step start.
inline ExtendedPoint lie_euler_conj_step(const FlowSpec& s, const ExtendedPoint& p, double dt) {
  if (!is_lax_form(s)) throw InvalidArgument("lie_euler_conj_step: not a Lax form");
  const BlockOperator b = lax_generator(s, p);
  const Matrix e = expm(Matrix(dt * b.full()));
  const Matrix ei = expm(Matrix(-dt * b.full()));
  ExtendedPoint out{p.gamma, p.mu};
  if (s.form == RhsForm::W_form) {
    const BlockOperator nu = shifted(p);
    out.mu = BlockOperator(p.dims(), e * nu.full() * ei);
    out.mu.pp().diagonal().array() += p.gamma;
  } else {
    out.mu = BlockOperator(p.dims(), e * p.mu.full() * ei);
  }
  check_finite(out, "lie_euler_conj_step");
  return out;
}

inline ExtendedPoint lie_euler_conj_step(const FlowSpec& s, const ExtendedPoint& p) {
  return lie_euler_conj_step(s, p, s.dt);
}

inline ExtendedPoint step(const FlowSpec& s, const ExtendedPoint& p, double dt) {
  return s.integrator == Integrator::RK4 ? rk4_step(s, p, dt) : lie_euler_conj_step(s, p, dt);
}

struct Trajectory {
  std::vector<double> times;
  std::vector<ExtendedPoint> points;
  std::map<std::string, std::vector<double>> observables;
  bool aborted = false;
  std::string abort_reason;
};

/// Number of steps and the length of the last one, so that the final time is t_end exactly.
inline std::pair<long long, double> step_plan(const FlowSpec& s) {
  if (s.t_end == 0.0) return {0, 0.0};
  const double ratio = s.t_end / s.dt;
  auto n = static_cast<long long>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(n)) <= 1e-9 * ratio) return {n, s.dt};
  n = static_cast<long long>(std::ceil(ratio));
  return {n, s.t_end - static_cast<double>(n - 1) * s.dt};
}

/// Steps from p0 to t_end, recording every record_every steps and the final point.
/// A failing step stops the run; the partial trajectory is returned flagged.
inline Trajectory integrate(const FlowSpec& s, const ExtendedPoint& p0) {
  validate(s);
  if (s.real_form && !is_real_form(p0, 1e-10)) {
    throw InvalidArgument("integrate: real_form run needs gamma imaginary and mu skew-hermitian");
  }
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.points.push_back(p0);
  const auto [n, last] = step_plan(s);
  ExtendedPoint p = p0;
  for (long long i = 1; i <= n; ++i) {
    const double h = i == n ? last : s.dt;
    try {
      p = step(s, p, h);
    } catch (const Error& e) {
      traj.aborted = true;
      traj.abort_reason = "step " + std::to_string(i) + ": " + e.what();
      return traj;
    }
    if (i % s.record_every == 0 || i == n) {
      traj.times.push_back(i == n ? s.t_end : static_cast<double>(i) * s.dt);
      traj.points.push_back(p);
    }
  }
  return traj;
}

struct InvariantReport {
  std::map<int, double> casimir_drift;
  double diag_drift = 0.0;
  double spectrum_drift = 0.0;
  double hamiltonian_drift = 0.0;
};

/// Drifts relative to the first point.  The Hamiltonian drift is left at 0 without an id.
inline InvariantReport monitor(const Trajectory& traj, const std::vector<int>& ks,
                               const std::optional<HamiltonianId>& id = std::nullopt) {
  InvariantReport r;
  for (int k : ks) r.casimir_drift[k] = 0.0;
  if (traj.points.empty()) return r;
  const ExtendedPoint& p0 = traj.points.front();
  std::map<int, Complex> c0;
  for (int k : ks) c0[k] = casimir(k, p0);
  const auto s0 = spectrum_shifted(p0);
  const Complex h0 = id ? hamiltonian(*id, p0) : Complex(0.0);
  for (std::size_t i = 1; i < traj.points.size(); ++i) {
    const ExtendedPoint& p = traj.points[i];
    for (int k : ks) r.casimir_drift[k] = std::max(r.casimir_drift[k], std::abs(casimir(k, p) - c0[k]));
    r.diag_drift = std::max({r.diag_drift, (p.mu.pp() - p0.mu.pp()).norm(),
                             (p.mu.mm() - p0.mu.mm()).norm()});
    r.spectrum_drift = std::max(r.spectrum_drift, spectrum_distance(s0, spectrum_shifted(p)));
    if (id) r.hamiltonian_drift = std::max(r.hamiltonian_drift, std::abs(hamiltonian(*id, p) - h0));
  }
  return r;
}

}  // namespace resgr
