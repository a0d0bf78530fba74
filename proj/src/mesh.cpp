#include "extruder/mesh.hpp"

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <cmath>
#include <sstream>

#include "extruder/errors.hpp"

namespace extruder {
namespace {

// phi1(P) = (e^P - 1)/P and phi2(P) = (e^P - 1 - P)/P^2 enter the fitted
// Neumann closure only through 1/phi2 and phi1/phi2.
struct NeumannWeights {
  double inv_phi2;
  double phi1_over_phi2;
};

NeumannWeights neumann_weights(double P) {
  if (std::fabs(P) < 0.5) {
    double phi1 = 0.0, phi2 = 0.0, term = 1.0;  // term = P^k / (k+1)!
    for (int k = 0; k < 24; ++k) {
      term = (k == 0) ? 1.0 : term * P / (k + 1);
      phi1 += term;
      phi2 += term / (k + 2);
    }
    return {1.0 / phi2, phi1 / phi2};
  }
  if (P > 30.0) {
    const double e = std::exp(-P);
    const double den = 1.0 - (1.0 + P) * e;
    return {P * P * e / den, P * (1.0 - e) / den};
  }
  const double em = std::expm1(P);
  const double emx = em - P;
  return {P * P / emx, P * em / emx};
}

void check_profile(std::span<const double> T) {
  if (static_cast<int>(T.size()) < 3) {
    throw GridError("profile needs at least three nodes");
  }
}

}  // namespace

ImmobilizedGrid::ImmobilizedGrid(int n, Phase phase) : n_(n), phase_(phase) {
  if (n < min_nodes) {
    std::ostringstream os;
    os << "grid needs at least " << min_nodes << " nodes (got " << n << ")";
    throw GridError(os.str());
  }
}

double ImmobilizedGrid::physical(int i, double s, double L) const {
  if (phase_ == Phase::liquid) return s + xi(i) * (L - s);
  return xi(i) * s;
}

std::vector<double> ImmobilizedGrid::physical_nodes(double s, double L) const {
  std::vector<double> x(n_);
  for (int i = 0; i < n_; ++i) x[i] = physical(i, s, L);
  return x;
}

double bernoulli(double x) {
  if (std::fabs(x) < 1e-8) return 1.0 - 0.5 * x;
  if (x > 700.0) return x * std::exp(-x);
  return x / std::expm1(x);
}

double bernoulli_half_weight(double x) {
  if (std::fabs(x) < 1e-2) {
    const double x2 = x * x;
    return 0.5 - x / 12.0 + x * x2 / 720.0;
  }
  return (1.0 - bernoulli(x)) / x;
}

void solid_frame_rhs(std::span<const double> T, double len, double len_dot,
                     double inlet_gradient, double alpha, double h, double T_b,
                     double b, std::span<double> out) {
  check_profile(T);
  const int n = static_cast<int>(T.size());
  const double dxi = 1.0 / (n - 1);
  const double D = alpha / (len * len);
  const double a = D / (dxi * dxi);

  {
    const double v = b / len;
    const double P = v * dxi / D;
    const NeumannWeights w = neumann_weights(P);
    const double G0 = inlet_gradient * len;
    out[0] = a * (w.inv_phi2 * (T[1] - T[0]) - w.phi1_over_phi2 * G0 * dxi) +
             h * (T_b - T[0]);
  }
  for (int i = 1; i < n - 1; ++i) {
    const double xi = i * dxi;
    const double v = (b - xi * len_dot) / len;
    const double P = v * dxi / D;
    out[i] = a * (bernoulli(P) * (T[i + 1] - T[i]) + bernoulli(-P) * (T[i - 1] - T[i])) +
             h * (T_b - T[i]);
  }
  out[n - 1] = 0.0;
}

void liquid_frame_rhs(std::span<const double> T, double s, double s_dot, double L,
                      double outlet_gradient, double alpha, double h, double T_b,
                      double b, std::span<double> out) {
  check_profile(T);
  const int n = static_cast<int>(T.size());
  const double len = L - s;
  const double dxi = 1.0 / (n - 1);
  const double D = alpha / (len * len);
  const double a = D / (dxi * dxi);

  out[0] = 0.0;
  for (int i = 1; i < n - 1; ++i) {
    const double xi = i * dxi;
    const double v = (b - (1.0 - xi) * s_dot) / len;
    const double P = v * dxi / D;
    out[i] = a * (bernoulli(P) * (T[i + 1] - T[i]) + bernoulli(-P) * (T[i - 1] - T[i])) +
             h * (T_b - T[i]);
  }
  {
    const double v = b / len;
    const double P = v * dxi / D;
    const NeumannWeights w = neumann_weights(-P);
    const double GN = outlet_gradient * len;
    out[n - 1] = a * (w.inv_phi2 * (T[n - 2] - T[n - 1]) + w.phi1_over_phi2 * GN * dxi) +
                 h * (T_b - T[n - 1]);
  }
}

std::vector<double> immobilized_rhs_solid(const SolidProfile& T, double s_dot, double q_f,
                                          const MaterialParams& m, const ProcessParams& p,
                                          double s_min) {
  if (!(T.s > s_min)) {
    std::ostringstream os;
    os << "solid domain degenerate: s=" << T.s << " <= s_min=" << s_min;
    throw DegenerateDomainError(os.str());
  }
  const Diffusivities d = derive_diffusivities(m);
  std::vector<double> out(T.T.size());
  solid_frame_rhs(T.T, T.s, s_dot, -q_f / m.k_s, d.alpha_s, d.h_s, p.T_b, p.b, out);
  return out;
}

std::vector<double> immobilized_rhs_liquid(const LiquidProfile& T, double s_dot,
                                           const MaterialParams& m, const ProcessParams& p,
                                           double s_min) {
  if (!(T.L - T.s > s_min)) {
    std::ostringstream os;
    os << "liquid domain degenerate: L - s=" << T.L - T.s << " <= s_min=" << s_min;
    throw DegenerateDomainError(os.str());
  }
  const Diffusivities d = derive_diffusivities(m);
  std::vector<double> out(T.T.size());
  liquid_frame_rhs(T.T, T.s, s_dot, T.L, p.q_m_star / m.k_l, d.alpha_l, d.h_l, p.T_b, p.b,
                   out);
  return out;
}

InterfaceGradients interface_gradients(const SolidProfile& Ts, const LiquidProfile& Tl) {
  check_profile(Ts.T);
  check_profile(Tl.T);
  const std::size_t ns = Ts.T.size();
  const double dxs = Ts.s / static_cast<double>(ns - 1);
  const double dxl = (Tl.L - Tl.s) / static_cast<double>(Tl.T.size() - 1);
  InterfaceGradients g;
  g.solid = (3.0 * Ts.T[ns - 1] - 4.0 * Ts.T[ns - 2] + Ts.T[ns - 3]) / (2.0 * dxs);
  g.liquid = (-3.0 * Tl.T[0] + 4.0 * Tl.T[1] - Tl.T[2]) / (2.0 * dxl);
  return g;
}

double fitted_end_gradient(double T_prev, double T_end, double len, double dxi,
                           double rel_speed, double alpha, double h, double T_b) {
  const double D = alpha / (len * len);
  const double P = rel_speed / len * dxi / D;
  const double G = -h * (T_b - T_end) / D;
  const double grad_xi =
      ((T_end - T_prev) * bernoulli(-P) + G * dxi * dxi * bernoulli_half_weight(-P)) / dxi;
  return grad_xi / len;
}

double fitted_start_gradient(double T_start, double T_next, double len, double dxi,
                             double rel_speed, double alpha, double h, double T_b) {
  const double D = alpha / (len * len);
  const double P = rel_speed / len * dxi / D;
  const double G = -h * (T_b - T_start) / D;
  const double grad_xi =
      ((T_next - T_start) * bernoulli(P) - G * dxi * dxi * bernoulli_half_weight(P)) / dxi;
  return grad_xi / len;
}

InterfaceGradients fitted_interface_gradients(const SolidProfile& Ts, const LiquidProfile& Tl,
                                              double s_dot, const MaterialParams& m,
                                              const ProcessParams& p) {
  check_profile(Ts.T);
  check_profile(Tl.T);
  const Diffusivities d = derive_diffusivities(m);
  const std::size_t ns = Ts.T.size();
  const std::size_t nl = Tl.T.size();
  InterfaceGradients g{};
  g.solid = fitted_end_gradient(Ts.T[ns - 2], Ts.T[ns - 1], Ts.s, 1.0 / (ns - 1), p.b - s_dot,
                                d.alpha_s, d.h_s, p.T_b);
  g.liquid = fitted_start_gradient(Tl.T[0], Tl.T[1], Tl.L - Tl.s, 1.0 / (nl - 1), p.b - s_dot,
                                   d.alpha_l, d.h_l, p.T_b);
  return g;
}

SolidProfile resample_profile(const SolidProfile& T, double s_new) {
  const int n = static_cast<int>(T.T.size());
  if (n < 4) throw ResampleError("resampling needs at least four nodes");
  if (!(T.s > 0.0) || !(s_new > 0.0)) {
    throw ResampleError("resampling needs positive domain lengths");
  }
  if (s_new == T.s) return T;
  const double dxi = 1.0 / (n - 1);
  const double cell = dxi * T.s;
  if (s_new > T.s + cell * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "resample from s=" << T.s << " to s=" << s_new
       << " extrapolates more than one cell";
    throw ResampleError(os.str());
  }

  std::vector<double> x(n), y(T.T.begin(), T.T.end()), dy(n);
  for (int i = 0; i < n; ++i) x[i] = i * dxi * T.s;

  // Second-order nodal slopes make the Hermite interpolant third order.
  dy[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * cell);
  for (int i = 1; i < n - 1; ++i) dy[i] = (y[i + 1] - y[i - 1]) / (2.0 * cell);
  dy[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * cell);
  const double right = dy[n - 1];
  const double x_end = x[n - 1];
  const double y_end = y[n - 1];

  boost::math::interpolators::cubic_hermite<std::vector<double>> interp(
      std::move(x), std::move(y), std::move(dy));
  SolidProfile out;
  out.s = s_new;
  out.T.resize(n);
  for (int j = 0; j < n; ++j) {
    const double xj = j * dxi * s_new;
    out.T[j] = xj <= x_end ? interp(xj) : y_end + right * (xj - x_end);
  }
  out.T[0] = T.T[0];
  out.T[n - 1] = T.T[n - 1];
  return out;
}

}  // namespace extruder
