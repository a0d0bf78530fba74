#pragma once

#include "extruder/params.hpp"

namespace extruder {

/// Closed-form equilibrium for a prescribed setpoint s_r.
///
/// Solid:  T_s,eq(x) = T_b + p3 e^{q3 (x - s_r)} + p4 e^{q4 (x - s_r)}
/// Liquid: T_l,eq(x) = T_b + p1 e^{q1 (x - s_r)} + p2 e^{q2 (x - s_r)}
///
/// The growing liquid exponential is stored anchored at the nozzle,
/// a1 = p1 e^{q1 (L - s_r)}, so evaluation never overflows at high screw
/// speed; p1 itself is reported for reference and may underflow to zero.
/// When an exponent pair collapses (b = 0 with no barrel coupling in that
/// phase) the phase profile is the linear limit instead.
struct SteadyState {
  double q1 = 0, q2 = 0, q3 = 0, q4 = 0;  // 1/m
  double p1 = 0, p2 = 0, p3 = 0, p4 = 0;  // K
  double a1 = 0;                          // K, p1 rescaled to x = L
  double K = 0;                           // W/m^2, interface heat flux
  double q_f_star = 0;                    // W/m^2, steady inlet flux
  double s_r = 0, T_b = 0, q_m_star = 0;
  double T_m = 0, L = 0;
  double k_s = 0, k_l = 0;
  bool solid_linear = false;
  bool liquid_linear = false;

  // Closed forms valid for any x (the solid form is also used beyond s_r when
  // the interface overshoots).
  double solid(double x) const;
  double solid_dx(double x) const;
  double solid_dxx(double x) const;
  double liquid(double x) const;
  double liquid_dx(double x) const;
  double liquid_dxx(double x) const;
};

SteadyState solve_steady_state(const MaterialParams& m, const ProcessParams& p);

struct ProfileSample {
  double T;
  double dTdx;
  bool solid;
};

/// Evaluates the equilibrium at x in [0, L]; solid branch for x < s_r.
ProfileSample eval_steady_profile(const SteadyState& ss, double x);

struct BarrelBounds {
  double lower;  // -q_underline
  double upper;  // q_bar
};

/// Admissible range for T_b - T_m guaranteeing a physically valid steady
/// state (solid at or below T_m, liquid at or above).
BarrelBounds barrel_temperature_bounds(const MaterialParams& m,
                                       const ProcessParams& p);

}  // namespace extruder
