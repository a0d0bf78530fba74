#include "extruder/integrator.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "extruder/errors.hpp"

namespace extruder {

void StepControl::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
    throw ConfigError("abs_tol and rel_tol must be positive");
  }
  if (!(dt_min > 0.0 && dt_min <= dt_init && dt_init <= dt_max)) {
    std::ostringstream os;
    os << "step bounds must satisfy 0 < dt_min <= dt_init <= dt_max (got " << dt_min << ", "
       << dt_init << ", " << dt_max << ")";
    throw ConfigError(os.str());
  }
}

std::vector<std::vector<int>> StiffSystem::jacobian_pattern() const {
  const int n = size();
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  return std::vector<std::vector<int>>(n, all);
}

std::vector<double> StiffSystem::typical_scale() const {
  return std::vector<double>(size(), 1.0);
}

namespace {

constexpr double kD = 1.0 / (2.0 + 1.4142135623730951);  // 1 / (2 + sqrt 2)
constexpr double kE32 = 6.0 + 1.4142135623730951;

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

struct RosenbrockStepper::Impl {
  using SpMat = Eigen::SparseMatrix<double>;

  int n = 0;
  std::vector<std::vector<int>> pattern;
  std::vector<std::vector<int>> colors;  // columns grouped by color
  std::vector<double> scale;
  std::vector<std::vector<int>> value_index;  // per column, index into W values
  std::vector<int> diag_index;

  SpMat W;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;

  // Jacobian values in pattern order, rank-one feedback term, time derivative.
  std::vector<std::vector<double>> jac;
  bool feedback = false;
  Eigen::VectorXd f_u, grad_u, lu_f_u;
  double sm_den = 1.0;
  std::vector<double> dfdt;

  // Work buffers.
  std::vector<double> f0, f1, f2, ywork, fwork;
  Eigen::VectorXd k1, k2, k3, rhsv;

  explicit Impl(const StiffSystem& sys) {
    n = sys.size();
    pattern = sys.jacobian_pattern();
    scale = sys.typical_scale();
    if (static_cast<int>(pattern.size()) != n || static_cast<int>(scale.size()) != n) {
      throw ConfigError("Jacobian pattern / scale size does not match the system");
    }
    for (auto& rows : pattern) {
      std::sort(rows.begin(), rows.end());
      rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    }
    color_columns();
    build_structure();
    jac.resize(n);
    for (int j = 0; j < n; ++j) jac[j].assign(pattern[j].size(), 0.0);
    f0.resize(n);
    f1.resize(n);
    f2.resize(n);
    ywork.resize(n);
    fwork.resize(n);
    dfdt.assign(n, 0.0);
    f_u = Eigen::VectorXd::Zero(n);
    grad_u = Eigen::VectorXd::Zero(n);
    lu_f_u = Eigen::VectorXd::Zero(n);
    k1.resize(n);
    k2.resize(n);
    k3.resize(n);
    rhsv.resize(n);
  }

  // Greedy distance-2 coloring: columns sharing a row never share a color.
  void color_columns() {
    std::vector<std::vector<char>> used;
    for (int j = 0; j < n; ++j) {
      int c = 0;
      for (; c < static_cast<int>(used.size()); ++c) {
        bool clash = false;
        for (int r : pattern[j]) {
          if (used[c][r]) {
            clash = true;
            break;
          }
        }
        if (!clash) break;
      }
      if (c == static_cast<int>(used.size())) {
        used.emplace_back(n, 0);
        colors.emplace_back();
      }
      for (int r : pattern[j]) used[c][r] = 1;
      colors[c].push_back(j);
    }
  }

  void build_structure() {
    std::vector<Eigen::Triplet<double>> trip;
    for (int j = 0; j < n; ++j) {
      for (int r : pattern[j]) trip.emplace_back(r, j, 0.0);
      trip.emplace_back(j, j, 0.0);
    }
    W.resize(n, n);
    W.setFromTriplets(trip.begin(), trip.end());
    W.makeCompressed();
    value_index.resize(n);
    diag_index.assign(n, -1);
    const int* outer = W.outerIndexPtr();
    const int* inner = W.innerIndexPtr();
    for (int j = 0; j < n; ++j) {
      auto find = [&](int r) {
        const int* b = inner + outer[j];
        const int* e = inner + outer[j + 1];
        const int* it = std::lower_bound(b, e, r);
        return static_cast<int>(it - inner);
      };
      value_index[j].reserve(pattern[j].size());
      for (int r : pattern[j]) value_index[j].push_back(find(r));
      diag_index[j] = find(j);
    }
  }
};

RosenbrockStepper::RosenbrockStepper(const StiffSystem& sys, StepControl ctl)
    : sys_(sys), ctl_(ctl), dt_(ctl.dt_init), impl_(std::make_unique<Impl>(sys)) {
  ctl_.validate();
}

RosenbrockStepper::~RosenbrockStepper() = default;

double RosenbrockStepper::attempt(double t, const std::vector<double>& y, double h,
                                  std::vector<double>& y_new) {
  Impl& m = *impl_;
  const int n = m.n;
  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());

  // Input and f at the step start.
  const double u0 = sys_.input(t, y);
  sys_.rhs(t, y, u0, m.f0);
  ++stats_.rhs_evals;
  if (!all_finite(m.f0)) return std::numeric_limits<double>::infinity();

  // Colored finite-difference Jacobian with the input held.
  ++stats_.jacobians;
  for (const auto& group : m.colors) {
    m.ywork = y;
    for (int j : group) {
      const double dj = sqrt_eps * std::max(std::fabs(y[j]), m.scale[j]);
      m.ywork[j] += dj;
    }
    sys_.rhs(t, m.ywork, u0, m.fwork);
    ++stats_.rhs_evals;
    for (int j : group) {
      const double dj = m.ywork[j] - y[j];
      for (std::size_t k = 0; k < m.pattern[j].size(); ++k) {
        const int r = m.pattern[j][k];
        m.jac[j][k] = (m.fwork[r] - m.f0[r]) / dj;
      }
    }
  }

  m.feedback = sys_.input_is_state_feedback();
  if (m.feedback) {
    const double du = sqrt_eps * std::max(std::fabs(u0), 1.0);
    sys_.rhs(t, y, u0 + du, m.fwork);
    ++stats_.rhs_evals;
    for (int i = 0; i < n; ++i) m.f_u[i] = (m.fwork[i] - m.f0[i]) / du;
    m.ywork = y;
    for (int j = 0; j < n; ++j) {
      const double dj = sqrt_eps * std::max(std::fabs(y[j]), m.scale[j]);
      m.ywork[j] = y[j] + dj;
      m.grad_u[j] = (sys_.input(t, m.ywork) - u0) / (m.ywork[j] - y[j]);
      m.ywork[j] = y[j];
    }
  }

  if (!sys_.autonomous()) {
    const double dt = sqrt_eps * std::max(std::fabs(t), 1.0);
    sys_.rhs(t + dt, y, u0, m.fwork);
    ++stats_.rhs_evals;
    for (int i = 0; i < n; ++i) m.dfdt[i] = (m.fwork[i] - m.f0[i]) / dt;
  }

  // W = I - h d J (sparse part).
  const double hd = h * kD;
  double* val = m.W.valuePtr();
  std::fill(val, val + m.W.nonZeros(), 0.0);
  for (int j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < m.pattern[j].size(); ++k) {
      val[m.value_index[j][k]] -= hd * m.jac[j][k];
    }
    val[m.diag_index[j]] += 1.0;
  }
  if (!m.analyzed) {
    m.lu.analyzePattern(m.W);
    m.analyzed = true;
  }
  m.lu.factorize(m.W);
  if (m.lu.info() != Eigen::Success) return std::numeric_limits<double>::infinity();

  if (m.feedback) {
    m.lu_f_u = m.lu.solve(m.f_u);
    m.sm_den = 1.0 - hd * m.grad_u.dot(m.lu_f_u);
  }
  // (W_sparse - hd f_u grad_u^T)^{-1} via Sherman-Morrison.
  auto solve = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
    Eigen::VectorXd z = m.lu.solve(r);
    if (m.feedback) z += (hd * m.grad_u.dot(z) / m.sm_den) * m.lu_f_u;
    return z;
  };

  for (int i = 0; i < n; ++i) m.rhsv[i] = m.f0[i] + hd * m.dfdt[i];
  m.k1 = solve(m.rhsv);

  for (int i = 0; i < n; ++i) m.ywork[i] = y[i] + 0.5 * h * m.k1[i];
  const double u1 = sys_.input(t + 0.5 * h, m.ywork);
  sys_.rhs(t + 0.5 * h, m.ywork, u1, m.f1);
  ++stats_.rhs_evals;
  if (!all_finite(m.f1)) return std::numeric_limits<double>::infinity();

  for (int i = 0; i < n; ++i) m.rhsv[i] = m.f1[i] - m.k1[i];
  m.k2 = solve(m.rhsv) + m.k1;

  y_new.resize(n);
  for (int i = 0; i < n; ++i) y_new[i] = y[i] + h * m.k2[i];
  const double u2 = sys_.input(t + h, y_new);
  sys_.rhs(t + h, y_new, u2, m.f2);
  ++stats_.rhs_evals;
  if (!all_finite(m.f2)) return std::numeric_limits<double>::infinity();

  for (int i = 0; i < n; ++i) {
    m.rhsv[i] = m.f2[i] - kE32 * (m.k2[i] - m.f1[i]) - 2.0 * (m.k1[i] - m.f0[i]) +
                hd * m.dfdt[i];
  }
  m.k3 = solve(m.rhsv);

  double err = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = h / 6.0 * (m.k1[i] - 2.0 * m.k2[i] + m.k3[i]);
    const double sc = ctl_.abs_tol + ctl_.rel_tol * std::max(std::fabs(y[i]), std::fabs(y_new[i]));
    err = std::max(err, std::fabs(e) / sc);
  }
  if (!std::isfinite(err)) return std::numeric_limits<double>::infinity();
  return err;
}

StepOutcome RosenbrockStepper::step(double t, std::vector<double>& y, double t_stop) {
  StepOutcome out;
  std::vector<double> y_new;
  double h = std::min(dt_, ctl_.dt_max);
  bool clipped = false;
  if (t + h >= t_stop) {
    h = t_stop - t;
    clipped = true;
  }
  for (;;) {
    double err = std::numeric_limits<double>::infinity();
    std::optional<DegenerateDomainError> domain_failure;
    try {
      err = attempt(t, y, h, y_new);
    } catch (const DegenerateDomainError& e) {
      domain_failure = e;
    }
    if (err <= 1.0) {
      y = std::move(y_new);
      ++stats_.accepted;
      out.t = clipped ? t_stop : t + h;
      out.dt = h;
      out.err = err;
      const double fac = err == 0.0 ? 5.0 : std::min(5.0, 0.8 * std::pow(err, -1.0 / 3.0));
      // A step shortened to land on t_stop should not shrink the proposal.
      const double base = clipped ? std::max(h, dt_) : h;
      dt_ = std::clamp(base * fac, ctl_.dt_min, ctl_.dt_max);
      out.dt_next = dt_;
      return out;
    }
    ++stats_.rejected;
    ++out.rejections;
    const double fac =
        std::isfinite(err) ? std::clamp(0.8 * std::pow(err, -1.0 / 3.0), 0.1, 0.5) : 0.5;
    const double h_new = h * fac;
    if (h_new < ctl_.dt_min) {
      if (domain_failure) throw *domain_failure;
      std::ostringstream os;
      os << "stiffness failure: step size " << h_new << " below dt_min=" << ctl_.dt_min
         << " at t=" << t << " (scaled error " << err << ")";
      throw SolverError(os.str());
    }
    h = h_new;
    clipped = false;
  }
}

void RosenbrockStepper::fixed_step(double t, std::vector<double>& y, double dt) {
  std::vector<double> y_new;
  const double err = attempt(t, y, dt, y_new);
  if (!std::isfinite(err)) {
    std::ostringstream os;
    os << "fixed step of " << dt << " at t=" << t << " produced non-finite values";
    throw SolverError(os.str());
  }
  y = std::move(y_new);
  ++stats_.accepted;
}

double RosenbrockStepper::integrate(double t0, std::vector<double>& y, double t_end) {
  double t = t0;
  while (t < t_end) {
    t = step(t, y, t_end).t;
  }
  return t;
}

}  // namespace extruder
