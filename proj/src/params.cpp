#include "extruder/params.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "extruder/errors.hpp"

namespace extruder {
namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << name << " must be a positive finite number (got " << v << ")";
    throw ConfigError(os.str());
  }
}

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << name << " must be non-negative and finite (got " << v << ")";
    throw ConfigError(os.str());
  }
}

}  // namespace

void validate(const MaterialParams& m) {
  require_positive(m.rho_s, "rho_s");
  require_positive(m.rho_l, "rho_l");
  require_positive(m.c_s, "c_s");
  require_positive(m.c_l, "c_l");
  require_positive(m.k_s, "k_s");
  require_positive(m.k_l, "k_l");
  require_positive(m.dH, "dH");
  require_nonnegative(m.hbar_s, "hbar_s");
  require_nonnegative(m.hbar_l, "hbar_l");
  if (!std::isfinite(m.T_m)) throw ConfigError("T_m must be finite");
}

void validate(const ProcessParams& p) {
  require_positive(p.L, "L");
  require_nonnegative(p.b, "b");
  require_nonnegative(p.q_m_star, "q_m_star");
  if (!std::isfinite(p.T_b)) throw ConfigError("T_b must be finite");
  if (!(p.s_0 > 0.0 && p.s_0 < p.s_r && p.s_r < p.L)) {
    std::ostringstream os;
    os << "interface positions must satisfy 0 < s_0 < s_r < L (got s_0=" << p.s_0
       << ", s_r=" << p.s_r << ", L=" << p.L << ")";
    throw ConfigError(os.str());
  }
}

Diffusivities derive_diffusivities(const MaterialParams& m) {
  validate(m);
  Diffusivities d;
  d.alpha_s = m.k_s / (m.rho_s * m.c_s);
  d.alpha_l = m.k_l / (m.rho_l * m.c_l);
  d.h_s = m.hbar_s / (m.rho_s * m.c_s);
  d.h_l = m.hbar_l / (m.rho_l * m.c_l);
  return d;
}

double beta_bar(const MaterialParams& m) {
  validate(m);
  return 1.0 / (m.rho_s * m.dH);
}

}  // namespace extruder
