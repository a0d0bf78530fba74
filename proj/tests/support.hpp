#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "extruder/mesh.hpp"
#include "extruder/params.hpp"
#include "extruder/steady_state.hpp"

namespace testing_support {

inline extruder::MaterialParams hdpe(double hbar = 0.0) {
  extruder::MaterialParams m;
  m.hbar_s = hbar;
  m.hbar_l = hbar;
  return m;
}

inline extruder::ProcessParams process(double b = 0.002) {
  extruder::ProcessParams p;
  p.b = b;
  return p;
}

inline double rel_diff(double a, double b, double scale = 0.0) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), scale, 1e-300});
}

// Closed-form steady profiles sampled on n-node immobilized grids, with the
// interface nodes pinned to T_m.
struct SteadyGrid {
  extruder::SolidProfile solid;
  extruder::LiquidProfile liquid;
};
SteadyGrid sample_steady(const extruder::SteadyState& ss, int n);

// Max nodal distance between the discrete steady state of the immobilized
// operators (s = s_r, s_dot = 0, q_f = q_f*) and the closed form.
struct DiscreteSteadyError {
  double solid = 0.0;
  double liquid = 0.0;
};
DiscreteSteadyError discrete_steady_error(const extruder::SteadyState& ss,
                                          const extruder::MaterialParams& m,
                                          const extruder::ProcessParams& p, int n);

// alpha T'' - b T' + h (T_b - T) = 0 integrated from x0 to x1 (either direction)
// with state (T, T').
using OdeState = std::array<double, 2>;
OdeState integrate(double alpha, double b, double h, double T_b, OdeState y, double x0,
                   double x1);

// Shooting oracle for the steady boundary-value problem.
struct Shooting {
  double tau = 0.0;   // T_l(L)
  double flux = 0.0;  // k_l T_l'(s_r)
  double q_f = 0.0;   // -k_s T_s'(0)
};
Shooting shoot(const extruder::MaterialParams& m, const extruder::ProcessParams& p);

// |alpha T'' - b T' + h (T_b - T)| relative to the size of its terms.
double ode_residual(double alpha, double b, double h, double T_b, double T, double T1,
                    double T2);

// Fresh scratch directory under the build tree.
std::string scratch_dir(const std::string& name);

}  // namespace testing_support
