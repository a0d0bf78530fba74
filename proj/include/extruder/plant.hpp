#pragma once

#include <vector>

#include "extruder/mesh.hpp"
#include "extruder/params.hpp"

namespace extruder {

// Two-phase plant on immobilized grids. The solid occupies (0, s) and the
// liquid (s, L); both interface nodes are pinned at T_m.
struct PlantState {
  SolidProfile Ts;
  LiquidProfile Tl;
  double s = 0.0;
  double t = 0.0;

  // Keeps the profile copies of s in sync after s is changed.
  void set_interface(double s_new);
};

struct Measurements {
  double Y1 = 0.0;  // interface position
  double Y2 = 0.0;  // inlet temperature
};

struct PlantDerivative {
  std::vector<double> dTs;
  std::vector<double> dTl;
  double s_dot = 0.0;
};

// Constants the plant right-hand side needs on every evaluation.
struct PlantModel {
  MaterialParams m;
  ProcessParams p;
  Diffusivities d;
  double beta = 0.0;
  double s_min = 0.0;

  PlantModel(const MaterialParams& m, const ProcessParams& p, double s_min);
};

/// Interface speed from the energy balance s_dot = beta (k_s T_s,x - k_l T_l,x).
/// The one-sided gradients depend on s_dot through the relative advection
/// speed, so the balance is solved as a scalar equation (monotone in s_dot).
double interface_speed(const PlantModel& pm, std::span<const double> Ts, double s,
                       std::span<const double> Tl);

PlantDerivative plant_rhs(const PlantState& x, double q_f, const PlantModel& pm);

Measurements measure(const PlantState& x);

enum class LiquidInit { linear, steady };

/// Linear solid from T_s0_inlet to T_m on (0, s_0). The liquid is either the
/// straight line through (s_0, T_m) with the nozzle slope q_m*/k_l, or the
/// equilibrium profile for an interface held at s_0.
PlantState default_initial_condition(const MaterialParams& m, const ProcessParams& p, int n,
                                     double T_s0_inlet, LiquidInit liquid = LiquidInit::linear);

}  // namespace extruder
