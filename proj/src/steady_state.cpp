#include "extruder/steady_state.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <sstream>

#include "extruder/errors.hpp"

namespace extruder {
namespace {

// amp * e^{arg}, without 0 * inf when the amplitude has underflowed and the
// exponential has not.
double scaled_exp(double amp, double arg) {
  if (amp == 0.0) return 0.0;
  const double e = std::exp(arg);
  if (std::isfinite(e) && e > 0.0) return amp * e;
  return std::copysign(std::exp(std::log(std::fabs(amp)) + arg), amp);
}

// Roots of alpha q^2 - b q - h = 0, the smaller one written without
// cancellation.
void exponent_pair(double alpha, double b, double h, double& q_plus, double& q_minus) {
  const double disc = std::sqrt(b * b + 4.0 * alpha * h);
  q_plus = (b + disc) / (2.0 * alpha);
  q_minus = (b + disc) > 0.0 ? -2.0 * h / (b + disc) : 0.0;
}

}  // namespace

double SteadyState::solid(double x) const {
  if (solid_linear) return T_m + (K / k_s) * (x - s_r);
  return T_b + scaled_exp(p3, q3 * (x - s_r)) + scaled_exp(p4, q4 * (x - s_r));
}

double SteadyState::solid_dx(double x) const {
  if (solid_linear) return K / k_s;
  return scaled_exp(p3 * q3, q3 * (x - s_r)) + scaled_exp(p4 * q4, q4 * (x - s_r));
}

double SteadyState::solid_dxx(double x) const {
  if (solid_linear) return 0.0;
  return scaled_exp(p3 * q3 * q3, q3 * (x - s_r)) +
         scaled_exp(p4 * q4 * q4, q4 * (x - s_r));
}

double SteadyState::liquid(double x) const {
  if (liquid_linear) return T_m + (q_m_star / k_l) * (x - s_r);
  return T_b + scaled_exp(a1, q1 * (x - L)) + scaled_exp(p2, q2 * (x - s_r));
}

double SteadyState::liquid_dx(double x) const {
  if (liquid_linear) return q_m_star / k_l;
  return scaled_exp(a1 * q1, q1 * (x - L)) + scaled_exp(p2 * q2, q2 * (x - s_r));
}

double SteadyState::liquid_dxx(double x) const {
  if (liquid_linear) return 0.0;
  return scaled_exp(a1 * q1 * q1, q1 * (x - L)) +
         scaled_exp(p2 * q2 * q2, q2 * (x - s_r));
}

SteadyState solve_steady_state(const MaterialParams& m, const ProcessParams& p) {
  const Diffusivities d = derive_diffusivities(m);
  if (!(p.s_r > 0.0 && p.s_r < p.L)) {
    std::ostringstream os;
    os << "steady state needs 0 < s_r < L (got s_r=" << p.s_r << ", L=" << p.L << ")";
    throw ConfigError(os.str());
  }
  if (!(p.b >= 0.0) || !(p.q_m_star >= 0.0)) {
    throw ConfigError("steady state needs b >= 0 and q_m_star >= 0");
  }

  SteadyState ss;
  ss.s_r = p.s_r;
  ss.T_b = p.T_b;
  ss.q_m_star = p.q_m_star;
  ss.T_m = m.T_m;
  ss.L = p.L;
  ss.k_s = m.k_s;
  ss.k_l = m.k_l;

  const double r = p.T_b - m.T_m;
  const double len_l = p.L - p.s_r;

  exponent_pair(d.alpha_l, p.b, d.h_l, ss.q1, ss.q2);
  exponent_pair(d.alpha_s, p.b, d.h_s, ss.q3, ss.q4);

  // Liquid. Boundary data: T(s_r) = T_m, T'(L) = q_m/k_l.
  if (ss.q1 == ss.q2) {
    ss.liquid_linear = true;
    ss.K = p.q_m_star;
  } else {
    const double E1 = std::exp(-ss.q1 * len_l);  // <= 1
    const double E2 = std::exp(ss.q2 * len_l);   // <= 1
    const double den = ss.q1 - ss.q2 * E1 * E2;
    assert(den > 0.0);
    ss.a1 = (p.q_m_star / m.k_l + r * ss.q2 * E2) / den;
    ss.p1 = ss.a1 * E1;
    ss.p2 = -r - ss.a1 * E1;
    ss.K = m.k_l * (ss.a1 * ss.q1 * E1 + ss.p2 * ss.q2);
  }

  // Solid. Boundary data: T(s_r) = T_m and flux balance k_s T'(s_r) = K.
  if (ss.q3 == ss.q4) {
    ss.solid_linear = true;
  } else {
    ss.p3 = (r * ss.q4 + ss.K / m.k_s) / (ss.q3 - ss.q4);
    ss.p4 = (-r * ss.q3 - ss.K / m.k_s) / (ss.q3 - ss.q4);
  }

  // Inlet Neumann condition T'(0) = -q_f*/k_s.
  ss.q_f_star = -m.k_s * ss.solid_dx(0.0);
  return ss;
}

ProfileSample eval_steady_profile(const SteadyState& ss, double x) {
  if (!(x >= 0.0 && x <= ss.L)) {
    std::ostringstream os;
    os << "x=" << x << " outside [0, L=" << ss.L << "]";
    throw DomainError(os.str());
  }
  if (x < ss.s_r) return {ss.solid(x), ss.solid_dx(x), true};
  return {ss.liquid(x), ss.liquid_dx(x), false};
}

BarrelBounds barrel_temperature_bounds(const MaterialParams& m, const ProcessParams& p) {
  const SteadyState ss = solve_steady_state(m, p);
  const double qm = p.q_m_star;
  if (qm == 0.0) return {0.0, 0.0};

  const double len_l = p.L - p.s_r;
  const double inf = std::numeric_limits<double>::infinity();

  BarrelBounds out{};
  // Upper: q_bar = -q_m / (k_l q2 e^{q2 (L - s_r)}).
  if (ss.q2 == 0.0) {
    out.upper = inf;
  } else {
    out.upper = -qm / (m.k_l * ss.q2 * std::exp(ss.q2 * len_l));
  }

  // Lower: -(q1 - q2) q_m / q_den with numerator and denominator both
  // scaled by e^{-q1 (L - s_r)}.
  const double E1 = std::exp(-ss.q1 * len_l);
  const double E2 = std::exp(ss.q2 * len_l);
  const double qden = -m.k_l * ss.q1 * ss.q2 * (1.0 - E2 * E1) +
                      m.k_s * ss.q3 * (ss.q1 - ss.q2 * E2 * E1);
  const double num = (ss.q1 - ss.q2) * qm * E1;
  if (qden == 0.0) {
    out.lower = -inf;
  } else {
    out.lower = -num / qden;
  }
  return out;
}

}  // namespace extruder
