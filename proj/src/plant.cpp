#include "extruder/plant.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "extruder/errors.hpp"
#include "extruder/steady_state.hpp"

namespace extruder {

void PlantState::set_interface(double s_new) {
  s = s_new;
  Ts.s = s_new;
  Tl.s = s_new;
}

PlantModel::PlantModel(const MaterialParams& m_, const ProcessParams& p_, double s_min_)
    : m(m_), p(p_), d(derive_diffusivities(m_)), beta(beta_bar(m_)), s_min(s_min_) {}

double interface_speed(const PlantModel& pm, std::span<const double> Ts, double s,
                       std::span<const double> Tl) {
  const std::size_t ns = Ts.size();
  const std::size_t nl = Tl.size();
  const double dxs = 1.0 / (ns - 1);
  const double dxl = 1.0 / (nl - 1);
  const double len_l = pm.p.L - s;
  const double Tm = pm.m.T_m;

  auto G = [&](double sdot) {
    const double rel = pm.p.b - sdot;
    const double gs = fitted_end_gradient(Ts[ns - 2], Tm, s, dxs, rel, pm.d.alpha_s, pm.d.h_s,
                                          pm.p.T_b);
    const double gl = fitted_start_gradient(Tm, Tl[1], len_l, dxl, rel, pm.d.alpha_l,
                                            pm.d.h_l, pm.p.T_b);
    return pm.beta * (pm.m.k_s * gs - pm.m.k_l * gl);
  };
  auto F = [&](double sdot) { return sdot - G(sdot); };

  // For valid states G is non-increasing, so the root lies between 0 and G(0).
  const double g0 = G(0.0);
  if (!std::isfinite(g0)) return std::numeric_limits<double>::quiet_NaN();
  if (g0 == 0.0) return 0.0;
  double lo = std::min(0.0, g0);
  double hi = std::max(0.0, g0);
  double flo = F(lo);
  double fhi = F(hi);
  for (int k = 0; k < 60 && flo * fhi > 0.0; ++k) {
    const double w = hi - lo;
    if (flo > 0.0) {
      lo -= w;
      flo = F(lo);
    } else {
      hi += w;
      fhi = F(hi);
    }
  }
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (!(flo * fhi < 0.0)) return std::numeric_limits<double>::quiet_NaN();

  std::uintmax_t iters = 100;
  const auto r = boost::math::tools::toms748_solve(F, lo, hi, flo, fhi,
                                                   boost::math::tools::eps_tolerance<double>(),
                                                   iters);
  return 0.5 * (r.first + r.second);
}

PlantDerivative plant_rhs(const PlantState& x, double q_f, const PlantModel& pm) {
  if (!(x.s > pm.s_min)) {
    std::ostringstream os;
    os << "solid domain degenerate: s=" << x.s << " <= s_min=" << pm.s_min;
    throw DegenerateDomainError(os.str());
  }
  if (!(pm.p.L - x.s > pm.s_min)) {
    std::ostringstream os;
    os << "liquid domain degenerate: L - s=" << pm.p.L - x.s << " <= s_min=" << pm.s_min;
    throw DegenerateDomainError(os.str());
  }
  PlantDerivative out;
  out.s_dot = interface_speed(pm, x.Ts.T, x.s, x.Tl.T);
  out.dTs.resize(x.Ts.T.size());
  out.dTl.resize(x.Tl.T.size());
  solid_frame_rhs(x.Ts.T, x.s, out.s_dot, -q_f / pm.m.k_s, pm.d.alpha_s, pm.d.h_s, pm.p.T_b,
                  pm.p.b, out.dTs);
  liquid_frame_rhs(x.Tl.T, x.s, out.s_dot, pm.p.L, pm.p.q_m_star / pm.m.k_l, pm.d.alpha_l,
                   pm.d.h_l, pm.p.T_b, pm.p.b, out.dTl);
  return out;
}

Measurements measure(const PlantState& x) { return {x.s, x.Ts.T.front()}; }

PlantState default_initial_condition(const MaterialParams& m, const ProcessParams& p, int n,
                                     double T_s0_inlet, LiquidInit liquid) {
  validate(m);
  if (!(p.s_0 > 0.0 && p.s_0 < p.L)) {
    std::ostringstream os;
    os << "initial interface must lie in (0, L) (got s_0=" << p.s_0 << ")";
    throw ConfigError(os.str());
  }
  if (T_s0_inlet > m.T_m) {
    std::ostringstream os;
    os << "T_s0_inlet=" << T_s0_inlet << " exceeds the melting point " << m.T_m
       << "; the initial solid would be invalid";
    throw ConfigError(os.str());
  }
  const ImmobilizedGrid gs(n, Phase::solid);
  const ImmobilizedGrid gl(n, Phase::liquid);

  PlantState x;
  x.Ts.T.resize(n);
  x.Tl.T.resize(n);
  x.set_interface(p.s_0);
  x.Tl.L = p.L;
  for (int i = 0; i < n; ++i) {
    x.Ts.T[i] = T_s0_inlet + (m.T_m - T_s0_inlet) * gs.xi(i);
  }
  if (liquid == LiquidInit::linear) {
    const double slope = p.q_m_star / m.k_l;
    for (int i = 0; i < n; ++i) x.Tl.T[i] = m.T_m + slope * (gl.physical(i, p.s_0, p.L) - p.s_0);
  } else {
    ProcessParams held = p;
    held.s_r = p.s_0;
    const SteadyState ss = solve_steady_state(m, held);
    for (int i = 0; i < n; ++i) x.Tl.T[i] = ss.liquid(gl.physical(i, p.s_0, p.L));
  }
  x.Ts.T[n - 1] = m.T_m;
  x.Tl.T[0] = m.T_m;
  return x;
}

}  // namespace extruder
