// Cubic flow at dims (2,2) on a real-form point: RK4 against the quadrature solution.
// Prints x(t) and the largest component gap over one quasi-period.

#include <cstdio>

#include "resgr/integrators.hpp"
#include "resgr/oracles.hpp"

using namespace resgr;

int main() {
  FourDimState s0;
  s0.chi = 1.0;
  s0.a1 = 0.3;
  s0.a2 = -0.5;
  s0.d1 = 0.7;
  s0.d2 = -0.2;
  s0.a = std::polar(0.5, 0.3);
  s0.b = std::polar(0.6, -1.1);
  s0.c = std::polar(0.45, 2.0);
  s0.d = std::polar(0.55, 0.7);

  const auto inv = four_dim_invariants(s0);
  const auto [lo, hi] = four_dim_turning_points(inv);
  const double period = four_dim_quasi_period(s0);
  std::printf("p2=%.6f q2=%.6f r2=%.6f s2=%.6f delta=%.6f\n", inv.p2, inv.q2, inv.r2, inv.s2, inv.delta);
  std::printf("x oscillates in [%.6f, %.6f], quasi-period %.6f\n\n", lo, hi, period);

  FlowSpec f;
  f.id = Hbasis{3, 0};
  f.form = RhsForm::H_form;
  f.dt = 1e-3;
  f.t_end = period;
  f.record_every = static_cast<int>(period / f.dt / 10);
  const auto t = integrate(f, four_dim_point(s0));

  std::printf("%10s %12s %12s %12s\n", "t", "x (RK4)", "x (quad)", "max |gap|");
  double worst = 0.0;
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    const auto s = four_dim_state(t.points[i]);
    const auto e = four_dim_evolve(s0, t.times[i]);
    const double g = std::max({std::abs(e.a - s.a), std::abs(e.b - s.b), std::abs(e.c - s.c),
                               std::abs(e.d - s.d)});
    worst = std::max(worst, g);
    std::printf("%10.4f %12.8f %12.8f %12.3e\n", t.times[i], std::norm(s.a), std::norm(e.a), g);
  }
  std::printf("\nlargest gap %.3e\n", worst);
  return worst <= 1e-5 ? 0 : 1;
}
