#pragma once

// Physical parameter sets shared by every module. All quantities are SI,
// temperatures in degrees Celsius (only differences against T_m matter).

namespace extruder {

/// Thermophysical constants of the two phases.
struct MaterialParams {
  double rho_s = 955.0;    // kg/m^3
  double rho_l = 780.0;    // kg/m^3
  double c_s = 1895.0;     // J/(kg K)
  double c_l = 2640.0;     // J/(kg K)
  double k_s = 0.373;      // W/(m K)
  double k_l = 0.324;      // W/(m K)
  double hbar_s = 0.0;     // W/(m^3 K), volumetric barrel heat transfer
  double hbar_l = 0.0;     // W/(m^3 K)
  double dH = 39000.0;     // J/kg
  double T_m = 135.0;      // degC

  /// Table values for high density polyethylene, barrel coupling off.
  static MaterialParams hdpe() { return {}; }
};

/// Geometry and operating point of the extruder.
struct ProcessParams {
  double L = 0.1;           // m
  double b = 0.002;         // m/s, screw advection speed
  double T_b = 145.0;       // degC
  double q_m_star = 100.0;  // W/m^2, nozzle heat flux
  double s_r = 0.05;        // m, interface setpoint
  double s_0 = 0.02;        // m, initial interface
};

/// Per-phase diffusivities and reduced heat-transfer rates.
struct Diffusivities {
  double alpha_s = 0.0;  // m^2/s
  double alpha_l = 0.0;
  double h_s = 0.0;      // 1/s
  double h_l = 0.0;
};

/// alpha_i = k_i / (rho_i c_i), h_i = hbar_i / (rho_i c_i).
/// Throws ConfigError when a constant that must be positive is not.
Diffusivities derive_diffusivities(const MaterialParams& m);

/// Coefficient of the interface ODE, 1 / (rho_s dH).
double beta_bar(const MaterialParams& m);

void validate(const MaterialParams& m);

/// Checks 0 < s_0 < s_r < L, b >= 0, q_m_star >= 0.
void validate(const ProcessParams& p);

}  // namespace extruder
