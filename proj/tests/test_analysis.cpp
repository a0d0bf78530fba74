#include <doctest.h>

#include <cmath>
#include <vector>

#include "extruder/analysis.hpp"
#include "extruder/errors.hpp"
#include "extruder/observer.hpp"
#include "support.hpp"

using namespace extruder;
using testing_support::hdpe;
using testing_support::process;

namespace {

std::vector<double> sample(int n, double len, double (*f)(double)) {
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = f(len * i / (n - 1));
  return u;
}

// Fine midpoint rule for ||u e^{-g x}||^2_H1 with u piecewise linear on the
// grid. Relative accuracy is about 1e-7 at the largest g tested.
double weighted_oracle(const std::vector<double>& u, double len, double g) {
  const int n = static_cast<int>(u.size());
  const double h = len / (n - 1);
  double sum = 0.0;
  const int sub = 4000;
  for (int k = 0; k + 1 < n; ++k) {
    const double slope = (u[k + 1] - u[k]) / h;
    for (int j = 0; j < sub; ++j) {
      const double t = (j + 0.5) / sub;
      const double x = (k + t) * h;
      const double v = u[k] + slope * t * h;
      const double e = std::exp(-g * x);
      const double z = v * e, zx = (slope - g * v) * e;
      sum += (z * z + zx * zx) * h / sub;
    }
  }
  return sum;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("piecewise-linear norms are exact") {
    // u = 2 + 3x on (0, 2): int u^2 = 56, int u_x^2 = 18.
    const auto u = sample(7, 2.0, [](double x) { return 2.0 + 3.0 * x; });
    const PiecewiseLinearNorms n = piecewise_linear_norms(u, 2.0);
    CHECK(n.L2 == doctest::Approx(std::sqrt(56.0)).epsilon(1e-14));
    CHECK(n.L2_dx == doctest::Approx(std::sqrt(18.0)).epsilon(1e-14));
    CHECK(n.H1 == doctest::Approx(std::sqrt(74.0)).epsilon(1e-14));

    // Hat on (0, 2): int u^2 = 2/3, int u_x^2 = 2.
    const std::vector<double> hat{0.0, 1.0, 0.0};
    const PiecewiseLinearNorms m = piecewise_linear_norms(hat, 2.0);
    CHECK(m.L2 * m.L2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(m.L2_dx * m.L2_dx == doctest::Approx(2.0).epsilon(1e-14));

    std::vector<double> shifted = u;
    for (double& v : shifted) v += 1.0;
    CHECK(h1_norm(shifted, u, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(h1_norm(u, u, 2.0) == 0.0);
  }

  TEST_CASE("exponentially weighted H1 norm") {
    const auto u = sample(41, 0.05, [](double x) { return 3.0 - 40.0 * x + 900.0 * x * x; });
    for (double g : {0.0, 5.0, 4851.8}) {
      CAPTURE(g);
      CHECK(weighted_h1_squared(u, 0.05, g) ==
            doctest::Approx(weighted_oracle(u, 0.05, g)).epsilon(1e-6));
    }
    const PiecewiseLinearNorms n = piecewise_linear_norms(u, 0.05);
    CHECK(weighted_h1_squared(u, 0.05, 0.0) == doctest::Approx(n.H1 * n.H1).epsilon(1e-13));
    // Constant data: (1 + g^2) (1 - e^{-2 g len}) / (2 g).
    const std::vector<double> one(11, 1.0);
    const double g = 3.0;
    CHECK(weighted_h1_squared(one, 1.0, g) ==
          doctest::Approx((1.0 + g * g) * (1.0 - std::exp(-2.0 * g)) / (2.0 * g)).epsilon(1e-12));
  }

  TEST_CASE("decay-rate fits") {
    std::vector<double> t, y, flat;
    for (int i = 0; i <= 200; ++i) {
      t.push_back(0.01 * i);
      y.push_back(7.0 * std::exp(-3.0 * t.back()));
      flat.push_back(2.5);
    }
    const DecayFit f = fit_decay_rate(t, y, 0.1, 2.5);
    CHECK(f.rate == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.ratio == doctest::Approx(3.0 / 2.5).epsilon(1e-10));
    CHECK(f.t0 == doctest::Approx(0.2).epsilon(0.03));
    CHECK(f.conclusive());
    CHECK(fit_decay_rate(t, flat).rate == doctest::Approx(0.0).scale(1.0));

    const DecayFit early = fit_decay_rate(t, y, 0.0, 2.5, 1.0);
    CHECK(early.t1 <= 1.0);
    CHECK(early.rate == doctest::Approx(3.0).epsilon(1e-10));

    std::vector<double> bad = y;
    bad[150] = 0.0;
    CHECK_THROWS_AS(fit_decay_rate(t, bad), AnalysisError);
    bad[150] = -1.0;
    CHECK_THROWS_AS(fit_decay_rate(t, bad), AnalysisError);
    const std::vector<double> t2{0.0, 1.0}, y2{1.0, 0.5};
    CHECK_THROWS_AS(fit_decay_rate(t2, y2), AnalysisError);
  }

  TEST_CASE("rate bounds") {
    const Diffusivities d = derive_diffusivities(hdpe(2e4));
    const double b = 0.05, L = 0.1, s_r = 0.05;
    CHECK(observer_rate_bound(d, b, L) ==
          doctest::Approx(2.0 * (d.h_s + b * b / (4.0 * d.alpha_s) + d.alpha_s / (4.0 * L * L))));
    const double natural = d.alpha_s / (16.0 * s_r) + b * b / (4.0 * d.alpha_s) + d.h_s;
    CHECK(closed_loop_rate_bound(d, b, s_r, 1.0) == doctest::Approx(1.0));
    CHECK(closed_loop_rate_bound(d, b, s_r, 1e9) == doctest::Approx(natural));
  }

  TEST_CASE("invariant bookkeeping") {
    InvariantCheck c{"x"};
    c.tol = 0.1;
    c.record(0.0, 1.0);
    c.record(1.0, -0.05);
    CHECK(c.pass());
    CHECK(c.worst == -0.05);
    CHECK(c.t_worst == 1.0);
    c.record(2.0, -0.2);
    c.record(3.0, -0.3);
    CHECK_FALSE(c.pass());
    CHECK(c.violations == 2);
    CHECK(c.t_first_violation == 2.0);
    CHECK(c.worst == -0.3);

    InvariantCheck off{"off"};
    off.enabled = false;
    off.record(0.0, -1e9);
    CHECK(off.pass());
    CHECK(off.violations == 0);

    InvariantReport rep(0.02);
    CHECK(rep.checks().size() == 6);
    CHECK(rep.all_pass());
    rep.valid_liquid.tol = 0.02;
    rep.valid_liquid.record(5.0, -1.0);
    CHECK_FALSE(rep.all_pass());
    CHECK_FALSE(rep.validity_pass());
  }

  TEST_CASE("validity check margins") {
    const MaterialParams m = hdpe();
    PlantState x = default_initial_condition(m, process(), 41, 100.0);
    const ValiditySlice ok = validity_check(x, m.T_m, 0.0);
    CHECK(ok.solid_ok);
    CHECK(ok.liquid_ok);
    CHECK(ok.solid_margin == 0.0);  // the pinned interface node
    x.Ts.T[10] = m.T_m + 1.0;
    const ValiditySlice bad = validity_check(x, m.T_m, 0.5);
    CHECK(bad.solid_margin == doctest::Approx(-1.0));
    CHECK_FALSE(bad.solid_ok);
    CHECK(validity_check(x, m.T_m, 1.5).solid_ok);
    x.Tl.T[5] = m.T_m - 2.0;
    CHECK(validity_check(x, m.T_m, 1.5).liquid_margin == doctest::Approx(-2.0));
    CHECK_FALSE(validity_check(x, m.T_m, 1.5).liquid_ok);
  }

  TEST_CASE("observer functional") {
    const int n = 51;
    const double s = 0.04, g = 30.0, k = 2.0;
    std::vector<double> Ts(n, 120.0), That(n, 120.0 - k);
    CHECK(lyapunov_observer(Ts, Ts, s, g) == 0.0);
    const double expect = 0.5 * k * k * (1.0 + g * g) * (1.0 - std::exp(-2.0 * g * s)) / (2.0 * g);
    CHECK(lyapunov_observer(Ts, That, s, g) == doctest::Approx(expect).epsilon(1e-12));
  }

  TEST_CASE("closed-loop functional vanishes at the equilibrium") {
    const MaterialParams m = hdpe(2e4);
    const ProcessParams p = process(0.002);
    const SteadyState ss = solve_steady_state(m, p);
    const KernelFunctions k = synthesize_kernel(m, p, ss, 0.2);
    SolidProfile eq;
    eq.s = p.s_r;
    for (int i = 0; i < 101; ++i) eq.T.push_back(ss.solid(p.s_r * i / 100.0));
    const ClosedLoopLyapunov v = lyapunov_closed_loop(k, ss, eq, p.s_r);
    CHECK(v.V == doctest::Approx(0.0).scale(1e-20));
    CHECK(v.p > 0.0);

    // A displaced interface contributes through X and phi(x - s) X.
    const ClosedLoopLyapunov moved = lyapunov_closed_loop(k, ss, eq, p.s_r + 1e-3);
    CHECK(moved.V3 == doctest::Approx(0.5e-6));
    CHECK(moved.V > 0.0);
    CHECK(moved.V == doctest::Approx(moved.V1 + moved.V2 + moved.p * moved.V3));
  }

  TEST_CASE("enthalpy of a uniform melt-temperature state") {
    const MaterialParams m = hdpe();
    const ProcessParams p = process();
    PlantState x;
    x.Ts.T.assign(31, m.T_m);
    x.Tl.T.assign(31, m.T_m);
    x.Tl.L = p.L;
    x.set_interface(0.03);
    CHECK(total_enthalpy(x, m) == doctest::Approx(m.rho_s * m.dH * (p.L - 0.03)).epsilon(1e-13));
    // One kelvin above T_m in the liquid adds rho_l c_l (L - s).
    x.Tl.T.assign(31, m.T_m + 1.0);
    CHECK(total_enthalpy(x, m) ==
          doctest::Approx((m.rho_s * m.dH + m.rho_l * m.c_l) * (p.L - 0.03)).epsilon(1e-13));
  }
}
