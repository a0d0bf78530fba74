#include "extruder/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "extruder/errors.hpp"

namespace extruder {
namespace {

// 8-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 8> kGlNodes = {
    0.019855071751231856, 0.101666761293186630, 0.237233795041835507, 0.408282678752175098,
    0.591717321247824902, 0.762766204958164493, 0.898333238706813370, 0.980144928248768144};
constexpr std::array<double, 8> kGlWeights = {
    0.050614268145188130, 0.111190517226687235, 0.156853322938943644, 0.181341891689180991,
    0.181341891689180991, 0.156853322938943644, 0.111190517226687235, 0.050614268145188130};

// int_0^h (a + m t)^2 e^{-k t} dt for k >= 0.
double quad_exp_moment(double a, double m, double h, double k) {
  if (k * h < 0.5) {
    double sum = 0.0;
    for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
      const double t = kGlNodes[q] * h;
      const double v = a + m * t;
      sum += kGlWeights[q] * v * v * std::exp(-k * t);
    }
    return sum * h;
  }
  const double e = std::exp(-k * h);
  const double I0 = (1.0 - e) / k;
  const double I1 = (I0 - h * e) / k;
  const double I2 = (2.0 * I1 - h * h * e) / k;
  return a * a * I0 + 2.0 * a * m * I1 + m * m * I2;
}

}  // namespace

PiecewiseLinearNorms piecewise_linear_norms(std::span<const double> u, double len) {
  const std::size_t n = u.size();
  if (n < 2) throw GridError("norm needs at least two nodes");
  const double h = len / static_cast<double>(n - 1);
  double l2 = 0.0, dx2 = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = u[i], b = u[i + 1];
    l2 += h / 3.0 * (a * a + a * b + b * b);
    dx2 += (b - a) * (b - a) / h;
  }
  PiecewiseLinearNorms out;
  out.L2 = std::sqrt(l2);
  out.L2_dx = std::sqrt(dx2);
  out.H1 = std::sqrt(l2 + dx2);
  return out;
}

double h1_norm(std::span<const double> profile, std::span<const double> reference, double len) {
  if (profile.size() != reference.size()) {
    std::ostringstream os;
    os << "h1_norm: grids differ (" << profile.size() << " vs " << reference.size() << " nodes)";
    throw GridError(os.str());
  }
  std::vector<double> d(profile.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = profile[i] - reference[i];
  return piecewise_linear_norms(d, len).H1;
}

namespace {

struct WeightedParts {
  double value = 0.0;  // int (u e^{-gamma x})^2
  double deriv = 0.0;  // int ((u e^{-gamma x})_x)^2
};

WeightedParts weighted_parts(std::span<const double> u, double len, double gamma) {
  const std::size_t n = u.size();
  if (n < 2) throw GridError("norm needs at least two nodes");
  const double h = len / static_cast<double>(n - 1);
  const double k = 2.0 * gamma;
  WeightedParts out;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double w = std::exp(-k * static_cast<double>(i) * h);
    if (w == 0.0) break;
    const double a = u[i];
    const double m = (u[i + 1] - u[i]) / h;
    // z_x = (u_x - gamma u) e^{-gamma x}
    out.value += w * quad_exp_moment(a, m, h, k);
    out.deriv += w * quad_exp_moment(m - gamma * a, -gamma * m, h, k);
  }
  return out;
}

}  // namespace

double weighted_h1_squared(std::span<const double> u, double len, double gamma) {
  const WeightedParts w = weighted_parts(u, len, gamma);
  return w.value + w.deriv;
}

ValiditySlice validity_check(const PlantState& x, double T_m, double tol) {
  ValiditySlice v;
  v.solid_margin = std::numeric_limits<double>::infinity();
  v.liquid_margin = std::numeric_limits<double>::infinity();
  for (double T : x.Ts.T) v.solid_margin = std::min(v.solid_margin, T_m - T);
  for (double T : x.Tl.T) v.liquid_margin = std::min(v.liquid_margin, T - T_m);
  v.solid_ok = v.solid_margin >= -tol;
  v.liquid_ok = v.liquid_margin >= -tol;
  return v;
}

void InvariantCheck::record(double t, double margin) {
  if (!enabled) return;
  if (margin < worst) {
    worst = margin;
    t_worst = t;
  }
  if (margin < -tol) {
    if (violations == 0) t_first_violation = t;
    ++violations;
  }
}

InvariantReport::InvariantReport(double eps) : eps_grid(eps) {
  for (InvariantCheck* c : checks()) c->tol = eps;
  // Z is a flux, not a temperature; its floor is set from Z(0) by the caller.
  Z_positive.tol = 0.0;
}

std::vector<const InvariantCheck*> InvariantReport::checks() const {
  return {&valid_solid, &valid_liquid, &sdot_nonneg, &s_in_band, &Z_positive, &underestimate};
}

std::vector<InvariantCheck*> InvariantReport::checks() {
  return {&valid_solid, &valid_liquid, &sdot_nonneg, &s_in_band, &Z_positive, &underestimate};
}

bool InvariantReport::all_pass() const {
  const auto all = checks();
  return std::all_of(all.begin(), all.end(), [](const InvariantCheck* c) { return c->pass(); });
}

DecayFit fit_decay_rate(std::span<const double> t, std::span<const double> y,
                        double skip_fraction, double theoretical, double t_max) {
  if (t.size() != y.size()) throw AnalysisError("decay fit: series lengths differ");
  if (t.size() < 3) throw AnalysisError("decay fit needs at least three samples");
  const double t_start = t.front() + skip_fraction * (std::min(t.back(), t_max) - t.front());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t n = 0;
  DecayFit fit;
  fit.t0 = std::numeric_limits<double>::infinity();
  fit.t1 = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_start || t[i] > t_max) continue;
    if (!(y[i] > 0.0)) {
      std::ostringstream os;
      os << "decay fit: non-positive value " << y[i] << " at t=" << t[i];
      throw AnalysisError(os.str());
    }
    const double ly = std::log(y[i]);
    sx += t[i];
    sy += ly;
    sxx += t[i] * t[i];
    sxy += t[i] * ly;
    syy += ly * ly;
    fit.t0 = std::min(fit.t0, t[i]);
    fit.t1 = std::max(fit.t1, t[i]);
    ++n;
  }
  if (n < 3) throw AnalysisError("decay fit: fewer than three samples in the window");
  const double dn = static_cast<double>(n);
  const double vx = sxx - sx * sx / dn;
  const double vy = syy - sy * sy / dn;
  const double cxy = sxy - sx * sy / dn;
  if (!(vx > 0.0)) throw AnalysisError("decay fit: window has no time extent");
  const double slope = cxy / vx;
  fit.rate = -slope;
  fit.points = n;
  fit.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  fit.theoretical = theoretical;
  if (std::isfinite(theoretical) && theoretical != 0.0) fit.ratio = fit.rate / theoretical;
  return fit;
}

double observer_rate_bound(const Diffusivities& d, double b, double L) {
  return 2.0 * (d.h_s + b * b / (4.0 * d.alpha_s) + d.alpha_s / (4.0 * L * L));
}

double closed_loop_rate_bound(const Diffusivities& d, double b, double s_r, double c) {
  return std::min(d.alpha_s / (16.0 * s_r) + b * b / (4.0 * d.alpha_s) + d.h_s, c);
}

double lyapunov_observer(std::span<const double> Ts, std::span<const double> That, double s,
                         double gamma) {
  if (Ts.size() != That.size()) throw GridError("lyapunov_observer: grids differ");
  std::vector<double> u(Ts.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = Ts[i] - That[i];
  return 0.5 * weighted_h1_squared(u, s, gamma);
}

ClosedLoopLyapunov lyapunov_closed_loop(const KernelFunctions& kf, const SteadyState& ss,
                                        const SolidProfile& That, double s) {
  const std::size_t n = That.T.size();
  const double h = That.s / static_cast<double>(n - 1);
  const double X = s - ss.s_r;
  std::vector<double> uhat(n), what(n);
  for (std::size_t i = 0; i < n; ++i) {
    uhat[i] = -ss.k_s * (That.T[i] - ss.solid(static_cast<double>(i) * h));
  }
  // Uniform grid: phi(x_i - x_j) depends on j - i only.
  std::vector<double> phi_back(n);
  for (std::size_t k = 0; k < n; ++k) phi_back[k] = kf.phi(-static_cast<double>(k) * h);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) * h;
    double integral = 0.0;
    for (std::size_t j = i; j < n; ++j) {
      const double w = (j == i || j == n - 1) ? 0.5 : 1.0;
      integral += w * phi_back[j - i] * uhat[j];
    }
    integral *= h;
    what[i] = uhat[i] - kf.beta / kf.alpha * integral - kf.phi(x - That.s) * X;
  }
  ClosedLoopLyapunov out;
  const WeightedParts parts = weighted_parts(what, That.s, kf.gamma);
  out.V1 = 0.5 * parts.value;
  out.V2 = 0.5 * parts.deriv;
  out.V3 = 0.5 * X * X;
  const double log_p = std::log(kf.c * kf.alpha / (16.0 * kf.beta * kf.beta * ss.s_r)) -
                       2.0 * kf.gamma * ss.s_r;
  out.p = std::exp(log_p);
  out.V = out.V1 + out.V2 + out.p * out.V3;
  return out;
}

double total_enthalpy(const PlantState& x, const MaterialParams& m) {
  auto integral = [](const std::vector<double>& T, double len, double Tm) {
    const std::size_t n = T.size();
    const double h = len / static_cast<double>(n - 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
      sum += w * (T[i] - Tm);
    }
    return sum * h;
  };
  const double L = x.Tl.L;
  return m.rho_s * m.c_s * integral(x.Ts.T, x.s, m.T_m) +
         m.rho_l * m.c_l * integral(x.Tl.T, L - x.s, m.T_m) + m.rho_s * m.dH * (L - x.s);
}

}  // namespace extruder
