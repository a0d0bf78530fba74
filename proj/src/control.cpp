#include "extruder/control.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "extruder/errors.hpp"

namespace extruder {

void KernelFunctions::shape(double x, double& eS, double& eC) const {
  switch (kind_) {
    case 1: {
      const double wx = omega_ * x;
      if (std::fabs(wx) < 1.0) {
        const double e = std::exp(sigma_ * x);
        eS = e * std::sinh(wx) / omega_;
        eC = e * std::cosh(wx);
      } else {
        const double e1 = std::exp((sigma_ + omega_) * x);
        const double e2 = std::exp((sigma_ - omega_) * x);
        eS = (e1 - e2) / (2.0 * omega_);
        eC = 0.5 * (e1 + e2);
      }
      return;
    }
    case -1: {
      const double e = std::exp(sigma_ * x);
      eS = e * std::sin(omega_ * x) / omega_;
      eC = e * std::cos(omega_ * x);
      return;
    }
    default: {
      const double e = std::exp(sigma_ * x);
      eS = e * x;
      eC = e;
      return;
    }
  }
}

void KernelFunctions::eval(double x, double& p0, double& p1, double& p2) const {
  const double k = c / beta;
  if (kind_ == 1 && std::fabs(omega_ * x) >= 1.0) {
    // Separate exponentials with the stably computed roots; sigma -/+ omega
    // would cancel when the slow root is tiny.
    const double e1 = std::exp(d1 * x), e2 = std::exp(d2 * x);
    const double w = 2.0 * omega_;
    p0 = k * (e1 - e2) / w;
    p1 = k * (d1 * e1 - d2 * e2) / w;
    p2 = k * (d1 * d1 * e1 - d2 * d2 * e2) / w;
    return;
  }
  double eS, eC;
  shape(x, eS, eC);
  const double kappa = kind_ * omega_ * omega_;
  p0 = k * eS;
  p1 = k * (sigma_ * eS + eC);
  p2 = k * ((sigma_ * sigma_ + kappa) * eS + 2.0 * sigma_ * eC);
}

double KernelFunctions::phi(double x) const {
  double p0, p1, p2;
  eval(x, p0, p1, p2);
  return p0;
}

double KernelFunctions::phi_dx(double x) const {
  double p0, p1, p2;
  eval(x, p0, p1, p2);
  return p1;
}

double KernelFunctions::phi_dxx(double x) const {
  double p0, p1, p2;
  eval(x, p0, p1, p2);
  return p2;
}

double KernelFunctions::f(double x) const { return phi_dx(-x) - gamma * phi(-x); }

double KernelFunctions::f_dx(double x) const { return -phi_dxx(-x) + gamma * phi_dx(-x); }

double KernelFunctions::g(double x) const { return phi_dx(x) - beta * C / alpha * phi(x); }

double KernelFunctions::residual(double x) const {
  const double p0 = phi(x), p1 = phi_dx(x), p2 = phi_dxx(x);
  const double scale = std::fabs(alpha * p2) + std::fabs(b_bar * p1) + std::fabs(E * p0);
  const double r = alpha * p2 - b_bar * p1 - E * p0;
  // Terms near the subnormal range have no relative precision left.
  const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  return r / std::max(scale, tiny);
}

namespace {

using cplx = std::complex<double>;

// int_0^1 e^{z t} (1 - t) dt and int_0^1 e^{z t} t dt.
void hat_moments(cplx z, cplx& left, cplx& right) {
  if (std::abs(z) < 0.5) {
    cplx a = 0.0, b = 0.0, zm = 1.0;
    double fact = 2.0;  // (m + 2)!
    for (int m = 0; m < 20; ++m) {
      a += zm / fact;
      b += zm * static_cast<double>(m + 1) / fact;
      zm *= z;
      fact *= m + 3;
    }
    left = a;
    right = b;
    return;
  }
  const cplx ez = std::exp(z), z2 = z * z;
  left = (ez - 1.0 - z) / z2;
  right = (ez * (z - 1.0) + 1.0) / z2;
}

}  // namespace

std::vector<double> KernelFunctions::product_weights(double len, int n) const {
  if (n < 2) throw GridError("quadrature needs at least two nodes");
  const double dx = len / (n - 1);
  std::vector<double> w(n, 0.0);

  if (kind_ == 0) {
    // Repeated root: f = (c/beta) e^{-sigma x} (1 + (gamma - sigma) x).
    // Gauss-Legendre on each cell; this case has no boundary layer beyond sigma.
    using Gauss = boost::math::quadrature::gauss<double, 10>;
    for (int k = 0; k + 1 < n; ++k) {
      const double x0 = k * dx;
      w[k] += Gauss::integrate([&](double t) { return f(x0 + dx * t) * (1.0 - t); }, 0.0, 1.0) * dx;
      w[k + 1] += Gauss::integrate([&](double t) { return f(x0 + dx * t) * t; }, 0.0, 1.0) * dx;
    }
    return w;
  }

  // f(x) = Re sum_j A_j e^{lambda_j x}.
  const double k = c / beta;
  std::vector<std::pair<cplx, cplx>> terms;  // (A, lambda)
  if (kind_ == 1) {
    const double two_w = d1 - d2;
    terms.emplace_back(k * (d1 - gamma) / two_w, -d1);
    terms.emplace_back(-k * (d2 - gamma) / two_w, -d2);
  } else {
    const cplx r1(sigma_, omega_);
    terms.emplace_back(2.0 * k * (r1 - gamma) / cplx(0.0, 2.0 * omega_), -r1);
  }
  for (const auto& [A, lambda] : terms) {
    cplx left, right;
    hat_moments(lambda * dx, left, right);
    for (int i = 0; i + 1 < n; ++i) {
      const cplx base = A * std::exp(lambda * (i * dx)) * dx;
      w[i] += std::real(base * left);
      w[i + 1] += std::real(base * right);
    }
  }
  return w;
}

KernelFunctions synthesize_kernel(const MaterialParams& m, const ProcessParams& p,
                                  const SteadyState& ss, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    std::ostringstream os;
    os << "control gain c must be positive (got " << c << ")";
    throw GainError(os.str());
  }
  const Diffusivities d = derive_diffusivities(m);
  const double beta = beta_bar(m);
  const double C = m.k_s * ss.solid_dx(ss.s_r);
  const double A = beta * (m.k_s * ss.solid_dxx(ss.s_r) - m.k_l * ss.liquid_dxx(ss.s_r));
  return kernel_from_coefficients(c, d.alpha_s, beta, p.b, d.h_s, C, A);
}

KernelFunctions kernel_from_coefficients(double c, double alpha, double beta, double b, double h,
                                         double C, double A) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    std::ostringstream os;
    os << "control gain c must be positive (got " << c << ")";
    throw GainError(os.str());
  }
  if (!(alpha > 0.0) || !(beta > 0.0)) throw GainError("kernel needs alpha_s > 0 and beta > 0");
  KernelFunctions k;
  k.c = c;
  k.alpha = alpha;
  k.h = h;
  k.b = b;
  k.beta = beta;
  k.gamma = b / (2.0 * alpha);
  k.C = C;
  k.A = A;
  k.b_bar = b + beta * C;
  k.E = A - beta * b * C / alpha + h;
  k.D = k.b_bar * k.b_bar + 4.0 * alpha * k.E;

  k.sigma_ = k.b_bar / (2.0 * alpha);
  k.omega_ = std::sqrt(std::fabs(k.D)) / (2.0 * alpha);
  k.kind_ = k.D > 0.0 ? 1 : (k.D < 0.0 ? -1 : 0);
  if (k.kind_ >= 0) {
    // d1 d2 = -E / alpha_s. Take the root without cancellation directly and
    // the other from the product.
    if (k.b_bar >= 0.0) {
      k.d1 = k.sigma_ + k.omega_;
      k.d2 = k.d1 != 0.0 ? -k.E / (alpha * k.d1) : k.sigma_ - k.omega_;
    } else {
      k.d2 = k.sigma_ - k.omega_;
      k.d1 = -k.E / (alpha * k.d2);
    }
  }
  return k;
}

namespace {

// int_0^len f(x) (T(x) - T_s,eq(x)) dx on the profile's grid.
double weighted_deviation(const KernelFunctions& kf, const SteadyState& ss,
                          const SolidProfile& T, DeviationQuadrature* cache) {
  if (cache) return (*cache)(kf, ss, T);
  DeviationQuadrature once;
  return once(kf, ss, T);
}

}  // namespace

double DeviationQuadrature::operator()(const KernelFunctions& kf, const SteadyState& ss,
                                       const SolidProfile& T) {
  const std::size_t n = T.T.size();
  if (T.s != len_ || n != w_.size()) {
    const double dx = T.s / static_cast<double>(n - 1);
    w_ = kf.product_weights(T.s, static_cast<int>(n));
    ref_ = 0.0;
    for (std::size_t i = 0; i < n; ++i) ref_ += w_[i] * ss.solid(static_cast<double>(i) * dx);
    len_ = T.s;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += w_[i] * T.T[i];
  return sum - ref_;
}

double output_feedback_qf(const KernelFunctions& kf, const SteadyState& ss,
                          const Measurements& meas, const SolidProfile& That,
                          DeviationQuadrature* cache) {
  const double ks = ss.k_s;
  return ss.q_f_star - kf.gamma * ks * (meas.Y2 - ss.solid(0.0)) -
         kf.beta * ks / kf.alpha * weighted_deviation(kf, ss, That, cache) +
         kf.f(meas.Y1) * (meas.Y1 - ss.s_r);
}

double full_state_feedback_U(const KernelFunctions& kf, const SteadyState& ss,
                             const SolidProfile& Ts, DeviationQuadrature* cache) {
  const double ks = ss.k_s;
  const double u0 = -ks * (Ts.T.front() - ss.solid(0.0));
  // int f u dx = -k_s int f (T - T_eq) dx
  const double integral = -ks * weighted_deviation(kf, ss, Ts, cache);
  return -kf.gamma * u0 - kf.beta / kf.alpha * integral - kf.f(Ts.s) * (Ts.s - ss.s_r);
}

double control_Z(const KernelFunctions& kf, const SteadyState& ss, const SolidProfile& That,
                 double s, DeviationQuadrature* cache) {
  const double integral = -ss.k_s * weighted_deviation(kf, ss, That, cache);
  return -kf.beta / kf.alpha * integral - kf.f(s) * (s - ss.s_r);
}

std::pair<double, PiState> pi_control(const Measurements& meas, double t, const PiState& st,
                                      const PiGains& k, double q_f_star, double s_r) {
  PiState next = st;
  const double X = meas.Y1 - s_r;
  if (st.started) next.integral += 0.5 * (st.X + X) * (t - st.t);
  next.t = t;
  next.X = X;
  next.started = true;
  return {q_f_star + k.Kp * X + k.Ki * next.integral, next};
}

double setpoint_lower_bound(const ProcessParams& p, const SolidProfile& That0,
                            const KernelFunctions& kf, const MaterialParams& m) {
  const double s0 = That0.s;
  const double fs0 = kf.f(s0);
  if (fs0 == 0.0 || !std::isfinite(fs0)) {
    std::ostringstream os;
    os << "gain function vanishes at s_0=" << s0 << "; setpoint restriction undefined";
    throw GainError(os.str());
  }
  (void)p;
  const std::vector<double> w = kf.product_weights(s0, static_cast<int>(That0.T.size()));
  double integral = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) integral += w[i] * (m.T_m - That0.T[i]) / fs0;
  return s0 + kf.beta * m.k_s / kf.alpha * integral;
}

bool check_setpoint_restriction(const ProcessParams& p, const SolidProfile& That0,
                                const KernelFunctions& kf, const MaterialParams& m) {
  return p.s_r > setpoint_lower_bound(p, That0, kf, m);
}

}  // namespace extruder
