#pragma once

#include <span>
#include <vector>

#include "extruder/params.hpp"

namespace extruder {

enum class Phase { solid, liquid, observer };

/// Uniform grid on the unit interval mapped onto a moving phase domain.
/// Solid and observer: x = xi * s. Liquid: x = s + xi * (L - s).
class ImmobilizedGrid {
 public:
  static constexpr int min_nodes = 16;

  ImmobilizedGrid(int n, Phase phase);

  int size() const { return n_; }
  Phase phase() const { return phase_; }
  double dxi() const { return 1.0 / (n_ - 1); }
  double xi(int i) const { return static_cast<double>(i) / (n_ - 1); }

  double physical(int i, double s, double L) const;
  std::vector<double> physical_nodes(double s, double L) const;

 private:
  int n_;
  Phase phase_;
};

/// Nodal temperatures on (0, s); the last node sits on the interface.
struct SolidProfile {
  std::vector<double> T;
  double s = 0.0;
};

/// Nodal temperatures on (s, L); the first node sits on the interface.
struct LiquidProfile {
  std::vector<double> T;
  double s = 0.0;
  double L = 0.0;
};

/// Bernoulli function B(x) = x / (e^x - 1), B(0) = 1.
double bernoulli(double x);

/// (1 - B(x)) / x, the half-cell weight of the fitted one-sided gradient.
double bernoulli_half_weight(double x);

// Transformed equation on the unit grid (derivation in docs/derivation.md):
//
//   theta_t = D theta_xixi - v(xi) theta_xi + h (T_b - theta)
//
// solid/observer:  D = alpha / s^2,      v = (b - xi s_dot) / s
// liquid:          D = alpha / (L-s)^2,  v = (b - (1 - xi) s_dot) / (L - s)
//
// Interior nodes use the exponentially fitted (Il'in-Allen-Southwell)
// central scheme, exact for steady advection-diffusion on each cell and
// equal to second-order central differences when the cell Peclet number is
// small. Neumann ends use the matching fitted half-cell closure.

/// Nodal d/dt of a solid-type profile on (0, len), pinned at xi = 1.
/// `inlet_gradient` is the physical dT/dx imposed at x = 0.
void solid_frame_rhs(std::span<const double> T, double len, double len_dot,
                     double inlet_gradient, double alpha, double h, double T_b,
                     double b, std::span<double> out);

/// Nodal d/dt of the liquid on (s, L), pinned at xi = 0, with physical
/// gradient `outlet_gradient` at x = L.
void liquid_frame_rhs(std::span<const double> T, double s, double s_dot, double L,
                      double outlet_gradient, double alpha, double h, double T_b,
                      double b, std::span<double> out);

/// Solid plant phase with inlet condition T_x(0) = -q_f / k_s.
/// Throws DegenerateDomainError when s <= s_min.
std::vector<double> immobilized_rhs_solid(const SolidProfile& T, double s_dot,
                                          double q_f, const MaterialParams& m,
                                          const ProcessParams& p, double s_min);

/// Liquid plant phase with nozzle condition T_x(L) = q_m* / k_l.
/// Throws DegenerateDomainError when L - s <= s_min.
std::vector<double> immobilized_rhs_liquid(const LiquidProfile& T, double s_dot,
                                           const MaterialParams& m,
                                           const ProcessParams& p, double s_min);

struct InterfaceGradients {
  double solid;   // dT_s/dx at x = s^-
  double liquid;  // dT_l/dx at x = s^+
};

/// Second-order one-sided three-point differences in physical coordinates.
/// Exact for quadratics. Throws GridError for fewer than three nodes.
InterfaceGradients interface_gradients(const SolidProfile& Ts, const LiquidProfile& Tl);

/// Physical gradient at the pinned right end of a solid-type profile on
/// (0, len) from its last two nodes. `rel_speed` is b - s_dot.
double fitted_end_gradient(double T_prev, double T_end, double len, double dxi,
                           double rel_speed, double alpha, double h, double T_b);

/// Physical gradient at the pinned left end of the liquid on (s, L) from its
/// first two nodes.
double fitted_start_gradient(double T_start, double T_next, double len, double dxi,
                             double rel_speed, double alpha, double h, double T_b);

/// One-sided gradients consistent with the fitted scheme: exact for the
/// steady cell solution, including unresolved boundary layers at the front.
/// Depends on s_dot through the relative advection speed b - s_dot.
InterfaceGradients fitted_interface_gradients(const SolidProfile& Ts,
                                              const LiquidProfile& Tl, double s_dot,
                                              const MaterialParams& m,
                                              const ProcessParams& p);

/// Cubic Hermite transfer of a solid-type profile from (0, s_old) onto the
/// grid of (0, s_new), with second-order nodal slopes. End values are kept.
/// Throws ResampleError when s_new exceeds s_old by more than one cell.
SolidProfile resample_profile(const SolidProfile& T, double s_new);

}  // namespace extruder
