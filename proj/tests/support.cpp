#include "support.hpp"

#include <Eigen/Dense>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <filesystem>
#include <functional>

namespace testing_support {

using namespace extruder;

std::string scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("extruder_tests_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

SteadyGrid sample_steady(const extruder::SteadyState& ss, int n) {
  SteadyGrid g;
  g.solid.s = ss.s_r;
  g.liquid.s = ss.s_r;
  g.liquid.L = ss.L;
  for (int i = 0; i < n; ++i) {
    g.solid.T.push_back(ss.solid(ss.s_r * i / (n - 1)));
    g.liquid.T.push_back(ss.liquid(ss.s_r + (ss.L - ss.s_r) * i / (n - 1)));
  }
  g.solid.T.back() = ss.T_m;
  g.liquid.T.front() = ss.T_m;
  return g;
}

namespace {

using Rhs = std::function<std::vector<double>(const std::vector<double>&)>;

// The operators are affine in T, so columns probed with unit steps are exact
// up to rounding.
double solve_affine(const Rhs& rhs, const std::vector<double>& exact, int pinned) {
  const int n = static_cast<int>(exact.size());
  std::vector<int> idx;
  for (int i = 0; i < n; ++i) {
    if (i != pinned) idx.push_back(i);
  }
  const int m = n - 1;
  std::vector<double> base(n, 0.0);
  base[pinned] = exact[pinned];
  const std::vector<double> r0 = rhs(base);
  Eigen::VectorXd c(m);
  for (int k = 0; k < m; ++k) c[k] = r0[idx[k]];
  Eigen::MatrixXd A(m, m);
  for (int j = 0; j < m; ++j) {
    std::vector<double> u = base;
    u[idx[j]] += 1.0;
    const std::vector<double> r = rhs(u);
    for (int k = 0; k < m; ++k) A(k, j) = r[idx[k]] - c[k];
  }
  const Eigen::VectorXd x = A.partialPivLu().solve(-c);
  double w = 0.0;
  for (int k = 0; k < m; ++k) w = std::max(w, std::fabs(x[k] - exact[idx[k]]));
  return w;
}

}  // namespace

DiscreteSteadyError discrete_steady_error(const extruder::SteadyState& ss,
                                          const extruder::MaterialParams& m,
                                          const extruder::ProcessParams& p, int n) {
  using namespace extruder;
  const SteadyGrid g = sample_steady(ss, n);
  DiscreteSteadyError e;
  e.solid = solve_affine(
      [&](const std::vector<double>& T) {
        return immobilized_rhs_solid(SolidProfile{T, ss.s_r}, 0.0, ss.q_f_star, m, p, 1e-5);
      },
      g.solid.T, n - 1);
  e.liquid = solve_affine(
      [&](const std::vector<double>& T) {
        return immobilized_rhs_liquid(LiquidProfile{T, ss.s_r, ss.L}, 0.0, m, p, 1e-5);
      },
      g.liquid.T, 0);
  return e;
}

OdeState integrate(double alpha, double b, double h, double T_b, OdeState y, double x0,
                   double x1) {
  namespace ode = boost::numeric::odeint;
  auto rhs = [&](const OdeState& u, OdeState& du, double) {
    du[0] = u[1];
    du[1] = (b * u[1] - h * (T_b - u[0])) / alpha;
  };
  auto stepper = ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<OdeState>());
  const double dx = (x1 - x0) * 1e-6;
  ode::integrate_adaptive(stepper, rhs, y, x0, x1, dx);
  return y;
}

// Shoots backward from the nozzle (the stable direction for the fast mode),
// matches T_l(s_r) = T_m, then integrates the solid from s_r to the inlet.
Shooting shoot(const MaterialParams& m, const ProcessParams& p) {
  const Diffusivities d = derive_diffusivities(m);
  const double g_L = p.q_m_star / m.k_l;
  const double a = integrate(d.alpha_l, p.b, d.h_l, p.T_b, {0.0, g_L}, p.L, p.s_r)[0];
  const double c = integrate(d.alpha_l, p.b, d.h_l, p.T_b, {1.0, g_L}, p.L, p.s_r)[0];
  Shooting out;
  out.tau = (m.T_m - a) / (c - a);
  const OdeState at_sr = integrate(d.alpha_l, p.b, d.h_l, p.T_b, {out.tau, g_L}, p.L, p.s_r);
  out.flux = m.k_l * at_sr[1];
  const OdeState inlet =
      integrate(d.alpha_s, p.b, d.h_s, p.T_b, {m.T_m, out.flux / m.k_s}, p.s_r, 0.0);
  out.q_f = -m.k_s * inlet[1];
  return out;
}

double ode_residual(double alpha, double b, double h, double T_b, double T, double T1, double T2) {
  const double r = alpha * T2 - b * T1 + h * (T_b - T);
  const double scale = std::fabs(alpha * T2) + std::fabs(b * T1) + std::fabs(h * (T_b - T));
  // Terms that have underflowed to subnormals carry no relative information.
  return std::fabs(r) / std::max(scale, 1e-280);
}

}  // namespace testing_support
