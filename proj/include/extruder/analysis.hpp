#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "extruder/control.hpp"
#include "extruder/mesh.hpp"
#include "extruder/plant.hpp"
#include "extruder/steady_state.hpp"

namespace extruder {

struct PiecewiseLinearNorms {
  double L2 = 0.0;
  double L2_dx = 0.0;  // L2 norm of the derivative
  double H1 = 0.0;     // sqrt(L2^2 + L2_dx^2)
};

/// Exact norms of the piecewise-linear interpolant of nodal values on the
/// uniform grid of (0, len).
PiecewiseLinearNorms piecewise_linear_norms(std::span<const double> u, double len);

/// H1 norm of profile - reference on a shared grid of (0, len).
double h1_norm(std::span<const double> profile, std::span<const double> reference, double len);

/// ||u e^{-gamma x}||^2_H1 for the piecewise-linear u, integrated exactly
/// cell by cell.
double weighted_h1_squared(std::span<const double> u, double len, double gamma);

struct ValiditySlice {
  double solid_margin = 0.0;   // min over nodes of T_m - T_s (negative: violation)
  double liquid_margin = 0.0;  // min over nodes of T_l - T_m
  bool solid_ok = true;
  bool liquid_ok = true;
};

ValiditySlice validity_check(const PlantState& x, double T_m, double tol);

/// Worst signed margin of one run-time invariant; a sample passes when its
/// margin is at least -tol.
struct InvariantCheck {
  std::string name;
  bool enabled = true;
  double worst = std::numeric_limits<double>::infinity();
  double t_worst = 0.0;
  long violations = 0;
  double t_first_violation = std::numeric_limits<double>::quiet_NaN();
  double tol = 0.0;

  void record(double t, double margin);
  bool pass() const { return !enabled || violations == 0; }
};

struct InvariantReport {
  double eps_grid = 0.0;
  InvariantCheck valid_solid{"valid_solid"};
  InvariantCheck valid_liquid{"valid_liquid"};
  InvariantCheck sdot_nonneg{"sdot_nonneg"};
  InvariantCheck s_in_band{"s_in_band"};
  InvariantCheck Z_positive{"Z_positive"};
  InvariantCheck underestimate{"underestimate"};
  long samples = 0;

  explicit InvariantReport(double eps = 0.0);
  std::vector<const InvariantCheck*> checks() const;
  std::vector<InvariantCheck*> checks();
  bool all_pass() const;
  bool validity_pass() const { return valid_solid.pass() && valid_liquid.pass(); }
};

struct DecayFit {
  double t0 = 0.0;
  double t1 = 0.0;
  double rate = 0.0;         // fitted decay rate, positive for decay
  double theoretical = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();
  double r2 = 0.0;
  std::size_t points = 0;
  bool conclusive() const { return r2 >= 0.95; }
};

/// Least-squares slope of log(y) against t over the samples after the first
/// skip_fraction of the time span (and before t_max). Throws AnalysisError for
/// non-positive values in the window or fewer than three samples.
DecayFit fit_decay_rate(std::span<const double> t, std::span<const double> y,
                        double skip_fraction = 0.1,
                        double theoretical = std::numeric_limits<double>::quiet_NaN(),
                        double t_max = std::numeric_limits<double>::infinity());

/// Observer rate bound 2 (h_s + b^2 / (4 alpha_s) + alpha_s / (4 L^2)).
double observer_rate_bound(const Diffusivities& d, double b, double L);

/// Closed-loop rate bound min(alpha_s / (16 s_r) + b^2 / (4 alpha_s) + h_s, c).
double closed_loop_rate_bound(const Diffusivities& d, double b, double s_r, double c);

/// V~ = 1/2 ||(T_s - That) e^{-gamma x}||^2_H1 on the plant solid grid.
double lyapunov_observer(std::span<const double> Ts, std::span<const double> That, double s,
                         double gamma);

struct ClosedLoopLyapunov {
  double V1 = 0.0;  // 1/2 ||zhat||^2
  double V2 = 0.0;  // 1/2 ||zhat_x||^2
  double V3 = 0.0;  // 1/2 X^2
  double p = 0.0;
  double V = 0.0;   // V1 + V2 + p V3
};

/// Target-system functional built from the estimate: uhat = -k_s (That - T_s,eq),
/// what = uhat - (beta/alpha_s) int_x^s phi(x-y) uhat(y) dy - phi(x-s) X,
/// zhat = what e^{-gamma x}.
ClosedLoopLyapunov lyapunov_closed_loop(const KernelFunctions& kf, const SteadyState& ss,
                                        const SolidProfile& That, double s);

/// Total enthalpy per unit area relative to the solid at T_m:
/// int rho_s c_s (T_s - T_m) + int (rho_l c_l (T_l - T_m) + rho_s dH) over the liquid.
double total_enthalpy(const PlantState& x, const MaterialParams& m);

}  // namespace extruder
