#include <doctest.h>

#include <cmath>
#include <vector>

#include "extruder/control.hpp"
#include "extruder/errors.hpp"
#include "support.hpp"

using namespace extruder;
using testing_support::hdpe;
using testing_support::process;

namespace {

struct Setup {
  MaterialParams m;
  ProcessParams p;
  SteadyState ss;
  KernelFunctions kf;
};

Setup make(double hbar, double b, double c, double T_b = 145.0) {
  Setup s{hdpe(hbar), process(b), {}, {}};
  s.p.T_b = T_b;
  s.ss = solve_steady_state(s.m, s.p);
  s.kf = synthesize_kernel(s.m, s.p, s.ss, c);
  return s;
}

SolidProfile steady_solid(const SteadyState& ss, double s, int n) {
  SolidProfile p;
  p.s = s;
  for (int i = 0; i < n; ++i) p.T.push_back(ss.solid(s * i / (n - 1)));
  return p;
}

double max_residual(const KernelFunctions& k, double span, int points) {
  double w = 0.0;
  for (int i = 0; i <= points; ++i) w = std::max(w, std::fabs(k.residual(-span * i / points)));
  return w;
}

}  // namespace

TEST_SUITE("control") {
  TEST_CASE("kernel initial conditions and residual over swept configurations") {
    for (double hbar : {0.0, 2e4, 2e5}) {
      for (double b : {0.002, 0.01, 0.05}) {
        for (double c : {0.2, 1.0, 5.0}) {
          CAPTURE(hbar);
          CAPTURE(b);
          CAPTURE(c);
          const Setup s = make(hbar, b, c);
          const KernelFunctions& k = s.kf;
          CHECK(k.phi(0.0) == 0.0);
          CHECK(k.phi_dx(0.0) == doctest::Approx(c / k.beta).epsilon(1e-14));
          CHECK(k.f(0.0) == doctest::Approx(c / k.beta).epsilon(1e-14));
          CHECK(k.D > 0.0);
          CHECK(k.d1 > k.d2);
          CHECK(max_residual(k, s.p.s_r, 10000) < 1e-9);
        }
      }
    }
  }

  TEST_CASE("f identity in terms of the exponents") {
    for (double hbar : {0.0, 2e4}) {
      for (double b : {0.002, 0.01, 0.05}) {
        const Setup s = make(hbar, b, 1.0);
        const KernelFunctions& k = s.kf;
        const double pre = k.c / (k.beta * (k.d1 - k.d2));
        double worst = 0.0;
        for (int i = 0; i <= 1000; ++i) {
          const double x = s.p.s_r * i / 1000.0;
          const double id = pre * ((k.d1 - k.gamma) * std::exp(-k.d1 * x) -
                                   (k.d2 - k.gamma) * std::exp(-k.d2 * x));
          const double scale = pre * (std::fabs(k.d1 - k.gamma) + std::fabs(k.d2 - k.gamma));
          worst = std::max(worst, std::fabs(k.f(x) - id) / scale);
        }
        CHECK(worst < 1e-13);
      }
    }
  }

  TEST_CASE("all three discriminant signs") {
    const double alpha = 2.061e-7, beta = 1.0 / (955.0 * 39000.0);
    const double b = 0.002;
    // D > 0, D = 0 and D < 0 chosen through A.
    const double A_zero = -b * b / (4.0 * alpha);
    for (double A : {0.0, A_zero, 4.0 * A_zero}) {
      CAPTURE(A);
      const KernelFunctions k = kernel_from_coefficients(0.7, alpha, beta, b, 0.0, 0.0, A);
      if (A == A_zero) CHECK(k.D == doctest::Approx(0.0));
      CHECK(k.phi(0.0) == 0.0);
      CHECK(k.phi_dx(0.0) == doctest::Approx(0.7 / beta).epsilon(1e-12));
      CHECK(max_residual(k, 0.05, 10000) < 1e-9);
    }
    const KernelFunctions trig =
        kernel_from_coefficients(0.7, alpha, beta, b, 0.0, 0.0, 4 * A_zero);
    CHECK(trig.D < 0.0);
    const double omega = std::sqrt(-trig.D) / (2.0 * alpha);
    const double x = -1e-4;
    CHECK(trig.phi(x) == doctest::Approx(0.7 / beta * std::exp(b / (2 * alpha) * x) *
                                         std::sin(omega * x) / omega)
                             .epsilon(1e-12));
    CHECK_THROWS_AS(kernel_from_coefficients(0.0, alpha, beta, b, 0.0, 0.0, 0.0), GainError);
  }

  TEST_CASE("melting-temperature barrel removes the linearization constants") {
    ProcessParams p = process(0.01);
    p.T_b = 135.0;
    p.q_m_star = 0.0;
    const MaterialParams m = hdpe(2e4);
    const SteadyState ss = solve_steady_state(m, p);
    const KernelFunctions k = synthesize_kernel(m, p, ss, 1.0);
    const Diffusivities d = derive_diffusivities(m);
    CHECK(k.C == 0.0);
    CHECK(k.A == 0.0);
    CHECK(k.b_bar == p.b);
    CHECK(k.D == doctest::Approx(p.b * p.b + 4.0 * d.alpha_s * d.h_s).epsilon(1e-14));
    CHECK_THROWS_AS(synthesize_kernel(m, p, ss, -1.0), GainError);
  }

  TEST_CASE("frozen kernel values") {
    const Setup s = make(0.0, 0.002, 0.2);
    CHECK(s.kf.gamma == doctest::Approx(4851.809651).epsilon(1e-9));
    CHECK(s.kf.d1 == doctest::Approx(9703.619303).epsilon(1e-9));
    CHECK(s.kf.f(0.05) == doctest::Approx(3724500.0).epsilon(1e-6));
  }

  TEST_CASE("laws return the steady input at the equilibrium") {
    const Setup s = make(2e4, 0.002, 0.2);
    const SolidProfile eq = steady_solid(s.ss, s.p.s_r, 101);
    const Measurements meas{s.p.s_r, s.ss.solid(0.0)};
    CHECK(output_feedback_qf(s.kf, s.ss, meas, eq) == doctest::Approx(s.ss.q_f_star));
    CHECK(full_state_feedback_U(s.kf, s.ss, eq) == doctest::Approx(0.0).scale(1.0));
    CHECK(control_Z(s.kf, s.ss, eq, s.p.s_r) == doctest::Approx(0.0).scale(1.0));
    const auto [q, st] = pi_control(meas, 0.0, PiState{}, PiGains{-2e4, -100.0}, s.ss.q_f_star,
                                    s.p.s_r);
    CHECK(q == s.ss.q_f_star);
    CHECK(st.started);
  }

  TEST_CASE("full-state and output feedback coincide on perfect estimates") {
    const Setup s = make(2e4, 0.002, 0.2);
    SolidProfile Ts;
    Ts.s = 0.03;
    for (int i = 0; i < 101; ++i) {
      const double x = 0.03 * i / 100.0;
      Ts.T.push_back(100.0 + 35.0 * x / 0.03);
    }
    const Measurements meas{Ts.s, Ts.T.front()};
    const double U = full_state_feedback_U(s.kf, s.ss, Ts);
    const double q = output_feedback_qf(s.kf, s.ss, meas, Ts);
    CHECK(q == doctest::Approx(s.ss.q_f_star - U).epsilon(1e-12));

    // Z equals U + gamma u(0) with u = -k_s (T - T_eq).
    const double u0 = -s.m.k_s * (Ts.T.front() - s.ss.solid(0.0));
    CHECK(control_Z(s.kf, s.ss, Ts, Ts.s) == doctest::Approx(U + s.kf.gamma * u0).epsilon(1e-12));

    // The difference against a wrong estimate is the weighted error integral only.
    SolidProfile est = Ts;
    for (std::size_t i = 0; i + 1 < est.T.size(); ++i) est.T[i] -= 3.0 * (1.0 - i / 100.0);
    const double q_est = output_feedback_qf(s.kf, s.ss, meas, est);
    std::vector<double> err(101);
    for (int i = 0; i < 101; ++i) err[i] = Ts.T[i] - est.T[i];
    const std::vector<double> w = s.kf.product_weights(Ts.s, 101);
    double integral = 0.0;
    for (int i = 0; i < 101; ++i) integral += w[i] * err[i];
    CHECK(q_est - q == doctest::Approx(s.kf.beta * s.m.k_s / s.kf.alpha * integral).epsilon(1e-9));
  }

  TEST_CASE("cached quadrature matches the direct one") {
    const Setup s = make(0.0, 0.01, 1.0);
    DeviationQuadrature cache;
    SolidProfile p;
    p.s = 0.025;
    for (int i = 0; i < 81; ++i) p.T.push_back(110.0 + 25.0 * i / 80.0);
    const Measurements meas{p.s, p.T.front()};
    const double direct = output_feedback_qf(s.kf, s.ss, meas, p);
    CHECK(output_feedback_qf(s.kf, s.ss, meas, p, &cache) == direct);
    p.T[10] += 1.0;
    CHECK(output_feedback_qf(s.kf, s.ss, meas, p, &cache) ==
          doctest::Approx(output_feedback_qf(s.kf, s.ss, meas, p)).epsilon(1e-14));
    p.s = 0.026;
    CHECK(output_feedback_qf(s.kf, s.ss, meas, p, &cache) ==
          doctest::Approx(output_feedback_qf(s.kf, s.ss, meas, p)).epsilon(1e-14));
  }

  TEST_CASE("sign audit: cold estimate short of the setpoint cools the inlet") {
    ProcessParams p = process(0.002);
    p.T_b = 135.0;
    p.q_m_star = 0.0;
    const MaterialParams m = hdpe();
    const SteadyState ss = solve_steady_state(m, p);
    const KernelFunctions k = synthesize_kernel(m, p, ss, 0.2);
    SolidProfile est;
    est.s = 0.03;
    for (int i = 0; i < 101; ++i) est.T.push_back(120.0 + 15.0 * i / 100.0);
    const Measurements meas{0.03, 125.0};
    CHECK(control_Z(k, ss, est, 0.03) > 0.0);
    CHECK(output_feedback_qf(k, ss, meas, est) < 0.0);
  }

  TEST_CASE("product weights integrate the kernel exactly against linear data") {
    for (double hbar : {0.0, 2e4}) {
      for (double b : {0.002, 0.05}) {
        CAPTURE(hbar);
        CAPTURE(b);
        const Setup s = make(hbar, b, 1.0);
        const double len = 0.03;
        auto v = [&](double x) { return 2.0 - 30.0 * x; };
        // Exact for a polynomial of degree <= 1 on every cell, so on a single cell too.
        for (int n : {2, 7, 101}) {
          const std::vector<double> w = s.kf.product_weights(len, n);
          double q = 0.0;
          for (int i = 0; i < n; ++i) q += w[i] * v(len * i / (n - 1));
          // Composite Simpson oracle, graded towards the fast mode at x = 0.
          double oracle = 0.0;
          const int N = 200000;
          for (int j = 0; j < N; ++j) {
            auto xm = [&](double t) { return len * t * t; };
            const double t0 = static_cast<double>(j) / N, t1 = static_cast<double>(j + 1) / N;
            const double a = xm(t0), c = xm(t1), m = xm(0.5 * (t0 + t1));
            auto g = [&](double x) { return s.kf.f(x) * v(x); };
            // Simpson in t with dx/dt = 2 len t.
            const double ga = g(a) * 2.0 * len * t0, gc = g(c) * 2.0 * len * t1;
            oracle += (t1 - t0) / 6.0 * (ga + 4.0 * g(m) * len * (t0 + t1) + gc);
          }
          CHECK(q == doctest::Approx(oracle).epsilon(1e-9));
        }
      }
    }
    // Trigonometric and repeated-root kernels.
    const double alpha = 2.061e-7, beta = 1.0 / (955.0 * 39000.0), b = 0.002;
    const double A_zero = -b * b / (4.0 * alpha);
    for (double A : {A_zero, 4.0 * A_zero}) {
      const KernelFunctions k = kernel_from_coefficients(0.7, alpha, beta, b, 0.0, 0.0, A);
      const std::vector<double> w = k.product_weights(0.01, 401);
      double q = 0.0;
      for (double wi : w) q += wi;
      // int_0^len f = phi(0) - phi(-len) - gamma int_0^len phi(-x) dx; check the
      // constant-data sum against a fine midpoint rule instead.
      double oracle = 0.0;
      const int N = 400000;
      for (int j = 0; j < N; ++j) oracle += k.f(0.01 * (j + 0.5) / N) * 0.01 / N;
      CHECK(q == doctest::Approx(oracle).epsilon(1e-8));
    }
  }

  TEST_CASE("output feedback quadrature converges at second order") {
    const Setup s = make(2e4, 0.002, 0.2);
    auto q = [&](int n) {
      SolidProfile est;
      est.s = 0.03;
      for (int i = 0; i < n; ++i) {
        const double x = 0.03 * i / (n - 1);
        est.T.push_back(135.0 - 35.0 * std::cos(1.5707963267948966 * x / 0.03));
      }
      return output_feedback_qf(s.kf, s.ss, {0.03, est.T.front()}, est);
    };
    const double a = q(51), b = q(101), c = q(201);
    CHECK(std::log2(std::fabs(a - b) / std::fabs(b - c)) > 1.9);
    // The unresolved fast mode of f no longer pollutes the coarse grid.
    CHECK(std::fabs(b - c) < 1e-4 * std::fabs(c));
  }

  TEST_CASE("PI law") {
    const Measurements low{0.04, 120.0};
    PiState st;
    auto [q0, s0] = pi_control(low, 0.0, st, PiGains{0.0, 0.0}, 5.0, 0.05);
    CHECK(q0 == 5.0);
    auto [q1, s1] = pi_control(low, 0.0, st, PiGains{1e3, 0.0}, 0.0, 0.05);
    CHECK(q1 < 0.0);  // s < s_r with Kp > 0 pushes the flux negative
    // Trapezoidal accumulation of X = -0.01 over 2 s.
    auto [qa, sa] = pi_control(low, 0.0, st, PiGains{0.0, 1.0}, 0.0, 0.05);
    auto [qb, sb] = pi_control(low, 2.0, sa, PiGains{0.0, 1.0}, 0.0, 0.05);
    CHECK(sb.integral == doctest::Approx(-0.02));
    CHECK(qb == doctest::Approx(-0.02));
  }

  TEST_CASE("setpoint restriction against a fine quadrature oracle") {
    const MaterialParams m = hdpe();
    ProcessParams p = process(0.002);
    p.s_0 = 0.03;
    p.s_r = 0.07;
    const SteadyState ss = solve_steady_state(m, p);
    const KernelFunctions k = synthesize_kernel(m, p, ss, 0.2);
    SolidProfile that0;
    that0.s = p.s_0;
    const int n = 101;
    for (int i = 0; i < n; ++i) that0.T.push_back(100.0 + 35.0 * i / (n - 1));

    // Composite Simpson on 1e5 intervals of f(x)/f(s0) (T_m - That(x)).
    const int N = 100000;
    const double hx = p.s_0 / N, fs0 = k.f(p.s_0);
    double sum = 0.0;
    for (int i = 0; i <= N; ++i) {
      const double x = i * hx;
      const double w = (i == 0 || i == N) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      sum += w * k.f(x) / fs0 * (35.0 * (1.0 - x / p.s_0));
    }
    const double oracle = p.s_0 + k.beta * m.k_s / k.alpha * sum * hx / 3.0;
    const double bound = setpoint_lower_bound(p, that0, k, m);
    // Product weights are exact on a linear estimate.
    CHECK(bound == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(check_setpoint_restriction(p, that0, k, m) == (p.s_r > oracle));

    // Flat estimate at T_m: any setpoint above s_0 passes.
    SolidProfile flat{std::vector<double>(n, m.T_m), p.s_0};
    CHECK(setpoint_lower_bound(p, flat, k, m) == p.s_0);
    ProcessParams tight = p;
    tight.s_r = p.s_0 + 1e-9;
    CHECK(check_setpoint_restriction(tight, flat, k, m));
    // s_r = s_0 with a cold estimate fails.
    tight.s_r = p.s_0;
    CHECK_FALSE(check_setpoint_restriction(tight, that0, k, m));
    // Monotone in s_r.
    ProcessParams wide = p;
    wide.s_r = bound * 1.01;
    CHECK(check_setpoint_restriction(wide, that0, k, m));
    wide.s_r = bound * 1.5;
    CHECK(check_setpoint_restriction(wide, that0, k, m));
  }
}
