#pragma once

#include <vector>
#include <utility>

#include "extruder/mesh.hpp"
#include "extruder/params.hpp"
#include "extruder/plant.hpp"
#include "extruder/steady_state.hpp"

namespace extruder {

/// Backstepping kernel phi and the gain functions derived from it.
///
///   alpha_s phi'' - b_bar phi' - E phi = 0,  phi(0) = 0,  phi'(0) = c / beta
///   E = A - beta b C / alpha_s + h_s,  b_bar = b + beta C,  D = b_bar^2 + 4 alpha_s E
///
/// Written as phi(x) = (c / beta) e^{sigma x} S(x) with sigma = b_bar / (2 alpha_s)
/// and S = sinh(omega x)/omega, sin(omega x)/omega or x according to the sign of
/// D, omega = sqrt(|D|) / (2 alpha_s). The same expression covers all three
/// cases without cancellation near D = 0.
class KernelFunctions {
 public:
  double c = 0.0;
  double gamma = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
  double b = 0.0;
  double h = 0.0;
  double C = 0.0;
  double A = 0.0;
  double b_bar = 0.0;
  double E = 0.0;
  double D = 0.0;
  double d1 = 0.0;  // real exponents, defined when D >= 0
  double d2 = 0.0;

  double phi(double x) const;
  double phi_dx(double x) const;
  double phi_dxx(double x) const;

  /// f(x) = phi'(-x) - gamma phi(-x).
  double f(double x) const;
  double f_dx(double x) const;

  /// g(x) = phi'(x) - (beta C / alpha_s) phi(x).
  double g(double x) const;

  /// Scaled residual of the kernel equation at x.
  double residual(double x) const;

  /// Weights w with sum_i w_i v_i = int_0^len f(x) v(x) dx exactly for the
  /// piecewise-linear interpolant v of n uniform nodal values. Stays second
  /// order when the fast mode of f is not resolved by the grid.
  std::vector<double> product_weights(double len, int n) const;

 private:
  friend KernelFunctions kernel_from_coefficients(double, double, double, double, double,
                                                  double, double);
  double sigma_ = 0.0;
  double omega_ = 0.0;
  int kind_ = 0;  // +1 hyperbolic, -1 trigonometric, 0 repeated root

  // e^{sigma x} S(x) and e^{sigma x} S'(x).
  void shape(double x, double& eS, double& eC) const;
  void eval(double x, double& p0, double& p1, double& p2) const;
};

/// Throws GainError for c <= 0.
KernelFunctions synthesize_kernel(const MaterialParams& m, const ProcessParams& p,
                                  const SteadyState& ss, double c);

/// Kernel from the linearization constants directly (C = k_s T_s,eq'(s_r),
/// A as in synthesize_kernel). Covers all three signs of D.
KernelFunctions kernel_from_coefficients(double c, double alpha, double beta, double b, double h,
                                         double C, double A);

/// Product weights of int_0^len f(x) (T - T_s,eq) dx, rebuilt only when the
/// grid changes. Lets repeated law evaluations on one domain skip the kernel.
class DeviationQuadrature {
 public:
  double operator()(const KernelFunctions& kf, const SteadyState& ss, const SolidProfile& T);

 private:
  double len_ = -1.0;
  std::vector<double> w_;
  double ref_ = 0.0;
};

/// Observer-based output feedback,
///   q_f = q_f* - gamma k_s (Y2 - T_s,eq(0))
///         - (beta k_s / alpha_s) int_0^Y1 f(x) (That - T_s,eq) dx + f(Y1) (Y1 - s_r).
double output_feedback_qf(const KernelFunctions& kf, const SteadyState& ss,
                          const Measurements& meas, const SolidProfile& That,
                          DeviationQuadrature* cache = nullptr);

/// U = -gamma u(0) - (beta/alpha_s) int_0^s f u dx - f(s) X with
/// u = -k_s (T_s - T_s,eq) and X = s - s_r. The applied flux is q_f* - U.
double full_state_feedback_U(const KernelFunctions& kf, const SteadyState& ss,
                             const SolidProfile& Ts, DeviationQuadrature* cache = nullptr);

/// Z = -(beta/alpha_s) int_0^s f uhat dx - f(s) X, uhat = -k_s (That - T_s,eq).
double control_Z(const KernelFunctions& kf, const SteadyState& ss, const SolidProfile& That,
                 double s, DeviationQuadrature* cache = nullptr);

struct PiState {
  double integral = 0.0;  // int (s - s_r) dt
  double t = 0.0;
  double X = 0.0;         // last error, for trapezoidal accumulation
  bool started = false;
};

struct PiGains {
  double Kp = 0.0;
  double Ki = 0.0;
};

/// q_f = q_f* + Kp X + Ki int X. Accumulates the integral with the trapezoid
/// rule between successive calls; returns the flux and the updated state.
std::pair<double, PiState> pi_control(const Measurements& meas, double t, const PiState& st,
                                      const PiGains& k, double q_f_star, double s_r);

/// Setpoint admissibility for the cooling-only design:
///   s_r > s_0 + (beta k_s / alpha_s) int_0^s0 (f / f(s_0)) (T_m - That(x, 0)) dx.
/// Throws GainError when f(s_0) == 0.
bool check_setpoint_restriction(const ProcessParams& p, const SolidProfile& That0,
                                const KernelFunctions& kf, const MaterialParams& m);

/// Smallest setpoint admitted by check_setpoint_restriction (the bound itself).
double setpoint_lower_bound(const ProcessParams& p, const SolidProfile& That0,
                            const KernelFunctions& kf, const MaterialParams& m);

}  // namespace extruder
