#include "extruder/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

#include "extruder/errors.hpp"

namespace extruder {
namespace {

class ClosedLoopSystem : public StiffSystem {
 public:
  ClosedLoopSystem(const RunConfig& cfg, const PlantModel& pm, const SteadyState& ss,
                   const KernelFunctions& kf)
      : cfg_(cfg), pm_(pm), ss_(ss), kf_(kf), n_(cfg.grid_n) {
    i_s_ = 2 * n_ - 2;
    i_obs_ = i_s_ + 1;
    int next = i_obs_ + n_ - 1;
    if (cfg.sdot_source == SdotSource::finite_difference) i_sobs_ = next++;
    if (cfg.controller == Controller::pi) i_int_ = next++;
    size_ = next;
    x_.Ts.T.assign(n_, pm.m.T_m);
    x_.Tl.T.assign(n_, pm.m.T_m);
    x_.Tl.L = pm.p.L;
    o_.That.T.assign(n_, pm.m.T_m);
  }

  int size() const override { return size_; }

  bool input_is_state_feedback() const override {
    return cfg_.control_update == ControlUpdate::continuous &&
           cfg_.controller != Controller::open_loop;
  }

  void unpack(std::span<const double> y, PlantState& x, ObserverState& o, double& I) const {
    const double Tm = pm_.m.T_m;
    for (int i = 0; i < n_ - 1; ++i) x.Ts.T[i] = y[i];
    x.Ts.T[n_ - 1] = Tm;
    x.Tl.T[0] = Tm;
    for (int i = 1; i < n_; ++i) x.Tl.T[i] = y[n_ - 2 + i];
    x.set_interface(y[i_s_]);
    for (int i = 0; i < n_ - 1; ++i) o.That.T[i] = y[i_obs_ + i];
    o.That.T[n_ - 1] = Tm;
    o.That.s = i_sobs_ >= 0 ? y[i_sobs_] : x.s;
    I = i_int_ >= 0 ? y[i_int_] : 0.0;
  }

  std::vector<double> pack(const PlantState& x, const ObserverState& o, double I) const {
    std::vector<double> y(size_);
    for (int i = 0; i < n_ - 1; ++i) y[i] = x.Ts.T[i];
    for (int i = 1; i < n_; ++i) y[n_ - 2 + i] = x.Tl.T[i];
    y[i_s_] = x.s;
    for (int i = 0; i < n_ - 1; ++i) y[i_obs_ + i] = o.That.T[i];
    if (i_sobs_ >= 0) y[i_sobs_] = o.That.s;
    if (i_int_ >= 0) y[i_int_] = I;
    return y;
  }

  double law(const PlantState& x, const ObserverState& o, double I) const {
    double q = ss_.q_f_star;
    switch (cfg_.controller) {
      case Controller::output_feedback:
        q = output_feedback_qf(kf_, ss_, measure(x), o.That, &quad_);
        break;
      case Controller::full_state:
        q = ss_.q_f_star - full_state_feedback_U(kf_, ss_, x.Ts, &quad_);
        break;
      case Controller::pi:
        q = ss_.q_f_star + cfg_.Kp * (x.s - ss_.s_r) + cfg_.Ki * I;
        break;
      case Controller::open_loop:
        break;
    }
    return std::clamp(q, cfg_.q_f_min, cfg_.q_f_max);
  }

  double input(double, std::span<const double> y) const override {
    if (!input_is_state_feedback()) return held_q_;
    double I;
    unpack(y, x_, o_, I);
    return law(x_, o_, I);
  }

  void rhs(double, std::span<const double> y, double u, std::span<double> dydt) const override {
    double I;
    unpack(y, x_, o_, I);
    const PlantDerivative d = plant_rhs(x_, u, pm_);
    for (int i = 0; i < n_ - 1; ++i) dydt[i] = d.dTs[i];
    for (int i = 1; i < n_; ++i) dydt[n_ - 2 + i] = d.dTl[i];
    dydt[i_s_] = d.s_dot;
    const double sdot_obs = i_sobs_ >= 0 ? sdot_fd_ : d.s_dot;
    const std::vector<double> dobs = observer_rhs(o_, measure(x_), u, sdot_obs, pm_);
    for (int i = 0; i < n_ - 1; ++i) dydt[i_obs_ + i] = dobs[i];
    if (i_sobs_ >= 0) dydt[i_sobs_] = sdot_fd_;
    if (i_int_ >= 0) dydt[i_int_] = x_.s - ss_.s_r;
  }

  std::vector<std::vector<int>> jacobian_pattern() const override {
    std::vector<std::set<int>> cols(size_);
    const int ns = n_ - 1;  // solid unknowns 0..ns-1
    const int l0 = n_ - 1;  // liquid unknowns l0..l0+ns-1 (nodes 1..n-1)
    auto band = [&](int col, int first, int count, int local) {
      for (int k = local - 1; k <= local + 1; ++k) {
        if (k >= 0 && k < count) cols[col].insert(first + k);
      }
    };
    // Rows moved by the interface speed and by s itself.
    std::vector<int> front_rows;
    for (int i = 0; i < ns; ++i) front_rows.push_back(i);
    for (int i = 0; i < ns; ++i) front_rows.push_back(l0 + i);
    front_rows.push_back(i_s_);
    if (i_sobs_ < 0) {
      for (int i = 0; i < ns; ++i) front_rows.push_back(i_obs_ + i);
    }
    for (int i = 0; i < ns; ++i) band(i, 0, ns, i);
    for (int i = 0; i < ns; ++i) band(l0 + i, l0, ns, i);
    for (int i = 0; i < ns; ++i) band(i_obs_ + i, i_obs_, ns, i);
    for (int r : front_rows) {
      cols[ns - 1].insert(r);  // solid node next to the interface
      cols[l0].insert(r);      // liquid node next to the interface
      cols[i_s_].insert(r);
    }
    cols[0].insert(i_obs_);  // Y2 enters the observer inlet condition
    if (i_sobs_ >= 0) {
      for (int i = 0; i < ns; ++i) cols[i_sobs_].insert(i_obs_ + i);
    }
    if (i_int_ >= 0) cols[i_s_].insert(i_int_);
    std::vector<std::vector<int>> out(size_);
    for (int j = 0; j < size_; ++j) out[j].assign(cols[j].begin(), cols[j].end());
    return out;
  }

  std::vector<double> typical_scale() const override {
    std::vector<double> sc(size_, std::max(1.0, std::fabs(pm_.m.T_m)));
    sc[i_s_] = pm_.p.L;
    if (i_sobs_ >= 0) sc[i_sobs_] = pm_.p.L;
    if (i_int_ >= 0) sc[i_int_] = pm_.p.L;
    return sc;
  }

  void set_held(double q) { held_q_ = q; }
  void set_sdot_fd(double v) { sdot_fd_ = v; }
  bool fd_observer() const { return i_sobs_ >= 0; }

 private:
  const RunConfig& cfg_;
  const PlantModel& pm_;
  const SteadyState& ss_;
  const KernelFunctions& kf_;
  int n_;
  int i_s_ = 0, i_obs_ = 0, i_sobs_ = -1, i_int_ = -1, size_ = 0;
  double held_q_ = 0.0;
  double sdot_fd_ = 0.0;
  mutable PlantState x_;
  mutable ObserverState o_;
  mutable DeviationQuadrature quad_;
};

SeriesRow make_row(double t, const PlantState& x, const ObserverState& o, double q_f,
                   const PlantModel& pm, const SteadyState& ss, const KernelFunctions& kf) {
  SeriesRow r;
  r.t = t;
  r.s = x.s;
  r.q_f = q_f;
  r.Ts_inlet = x.Ts.T.front();
  r.sdot = interface_speed(pm, x.Ts.T, x.s, x.Tl.T);
  const ValiditySlice v = validity_check(x, pm.m.T_m, 0.0);
  r.solid_margin = v.solid_margin;
  r.liquid_margin = v.liquid_margin;
  r.That_inlet = o.That.T.front();

  const SolidProfile est = o.That.s == x.s ? o.That : resample_profile(o.That, x.s);
  const std::size_t n = x.Ts.T.size();
  r.under_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    r.under_margin = std::min(r.under_margin, x.Ts.T[i] - est.T[i]);
  }
  std::vector<double> err(n), dev(n);
  const double h = x.s / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    err[i] = x.Ts.T[i] - est.T[i];
    dev[i] = x.Ts.T[i] - ss.solid(static_cast<double>(i) * h);
  }
  const PiecewiseLinearNorms en = piecewise_linear_norms(err, x.s);
  r.err_L2 = en.L2;
  r.err_H1 = en.H1;
  r.dev_H1 = piecewise_linear_norms(dev, x.s).H1;
  r.Phi_hat = r.dev_H1 + r.err_H1 + std::fabs(x.s - ss.s_r);
  r.Z = control_Z(kf, ss, o.That, x.s);
  r.V_tilde = 0.5 * weighted_h1_squared(err, x.s, kf.gamma);
  r.V_hat = lyapunov_closed_loop(kf, ss, o.That, x.s).V;
  return r;
}

void add_snapshot(RunRecord& rec, double t, const PlantState& x, const ObserverState& o) {
  const std::size_t n = x.Ts.T.size();
  const double L = x.Tl.L;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = static_cast<double>(i) / static_cast<double>(n - 1);
    rec.snapshots.push_back({t, xi * x.s, x.Ts.T[i], "solid", "plant"});
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = static_cast<double>(i) / static_cast<double>(n - 1);
    rec.snapshots.push_back({t, x.s + xi * (L - x.s), x.Tl.T[i], "liquid", "plant"});
  }
  for (std::size_t i = 0; i < o.That.T.size(); ++i) {
    const double xi = static_cast<double>(i) / static_cast<double>(o.That.T.size() - 1);
    rec.snapshots.push_back({t, xi * o.That.s, o.That.T[i], "solid", "observer"});
  }
}

void add_steady_snapshot(RunRecord& rec, const SteadyState& ss, int n) {
  for (int i = 0; i < n; ++i) {
    const double x = ss.L * i / (n - 1);
    const ProfileSample s = eval_steady_profile(ss, x);
    rec.snapshots.push_back({0.0, x, s.T, s.solid ? "solid" : "liquid", "steady"});
  }
}

}  // namespace

bool interface_checks_apply(const RunConfig& cfg) {
  return cfg.p.T_b == cfg.m.T_m && cfg.p.q_m_star == 0.0 &&
         cfg.controller == Controller::output_feedback && cfg.sdot_source == SdotSource::plant;
}

void record_invariants(InvariantReport& rep, const SeriesRow& row, const RunConfig& cfg,
                       bool interface_checks) {
  ++rep.samples;
  // Z decays to zero; the first sample fixes its round-off floor.
  if (rep.samples == 1) rep.Z_positive.tol = cfg.eps_Z_rel * std::fabs(row.Z);
  rep.valid_solid.record(row.t, row.solid_margin);
  rep.valid_liquid.record(row.t, row.liquid_margin);
  rep.underestimate.enabled = cfg.sdot_source == SdotSource::plant;
  rep.underestimate.record(row.t, row.under_margin);
  rep.sdot_nonneg.enabled = interface_checks;
  rep.s_in_band.enabled = interface_checks;
  rep.Z_positive.enabled = interface_checks;
  rep.sdot_nonneg.tol = cfg.eps_sdot;
  rep.s_in_band.tol = cfg.eps_s;
  rep.sdot_nonneg.record(row.t, row.sdot);
  rep.s_in_band.record(row.t, std::min(row.s - cfg.p.s_0, cfg.p.s_r - row.s));
  rep.Z_positive.record(row.t, row.Z);
}

RunRecord run_closed_loop(const RunConfig& cfg) {
  validate(cfg);
  RunRecord rec;
  rec.config = cfg;
  rec.report = InvariantReport(cfg.eps_grid);
  rec.interface_checks = interface_checks_apply(cfg);

  const PlantModel pm(cfg.m, cfg.p, cfg.resolved_s_min());
  const SteadyState ss = solve_steady_state(cfg.m, cfg.p);
  const KernelFunctions kf = synthesize_kernel(cfg.m, cfg.p, ss, cfg.gain_c);
  rec.steady = ss;

  PlantState x =
      default_initial_condition(cfg.m, cfg.p, cfg.grid_n, cfg.T_s0_inlet, cfg.init_liquid);
  ObserverState o = default_observer_initial(x, cfg.obs_offset);
  double I = 0.0;

  if (cfg.setpoint_check != SetpointCheck::off) {
    rec.setpoint_bound = setpoint_lower_bound(cfg.p, o.That, kf, cfg.m);
    rec.setpoint_ok = cfg.p.s_r > rec.setpoint_bound;
    if (!rec.setpoint_ok) {
      std::ostringstream os;
      os << "setpoint s_r=" << cfg.p.s_r << " violates the admissibility bound "
         << rec.setpoint_bound << " for the initial estimate";
      if (cfg.setpoint_check == SetpointCheck::enforce) throw ConfigError(os.str());
      rec.warnings.push_back(os.str());
    }
  }

  ClosedLoopSystem sys(cfg, pm, ss, kf);
  std::vector<double> y = sys.pack(x, o, I);
  sys.set_held(sys.law(x, o, I));
  RosenbrockStepper stepper(sys, cfg.step);

  auto log_sample = [&](double t) {
    const double q = sys.input_is_state_feedback() ? sys.law(x, o, I) : sys.input(t, y);
    SeriesRow row = make_row(t, x, o, q, pm, ss, kf);
    record_invariants(rec.report, row, cfg, rec.interface_checks);
    rec.series.push_back(row);
  };

  add_steady_snapshot(rec, ss, cfg.grid_n);
  add_snapshot(rec, 0.0, x, o);
  log_sample(0.0);

  double t = 0.0;
  double last_log = 0.0;
  const bool snapshots = cfg.snapshot_every > 0.0;
  double next_snap = snapshots ? cfg.snapshot_every : std::numeric_limits<double>::infinity();
  while (t < cfg.t_end) {
    const double t_stop = std::min(cfg.t_end, next_snap);
    const double s_prev = x.s;
    StepOutcome out;
    try {
      out = stepper.step(t, y, t_stop);
    } catch (const Error& e) {
      if (rec.report.validity_pass()) throw;
      rec.terminated_early = true;
      rec.termination_reason = e.what();
      break;
    }
    t = out.t;
    sys.unpack(y, x, o, I);
    if (sys.fd_observer()) {
      sys.set_sdot_fd((x.s - s_prev) / out.dt);
      o.That = resample_profile(o.That, x.s);
      y = sys.pack(x, o, I);
    }
    if (!sys.input_is_state_feedback()) sys.set_held(sys.law(x, o, I));

    const bool at_snap = snapshots && t >= next_snap;
    if (at_snap || t >= cfg.t_end || t - last_log >= cfg.log_every) {
      log_sample(t);
      last_log = t;
    }
    if (at_snap) {
      add_snapshot(rec, t, x, o);
      next_snap += cfg.snapshot_every;
    }
  }
  rec.stats = stepper.stats();
  return rec;
}

std::vector<SweepItem> sweep(const RunConfig& base, const std::vector<double>& b_list,
                             const std::vector<double>& c_list, bool cross) {
  std::vector<SweepItem> items;
  auto add = [&items](double b, double c) {
    SweepItem it;
    it.b = b;
    it.c = c;
    items.push_back(std::move(it));
  };
  if (cross) {
    for (double b : b_list)
      for (double c : c_list) add(b, c);
  } else {
    if (b_list.size() != c_list.size()) {
      throw ConfigError("paired sweep needs sweep_b and sweep_c of equal length");
    }
    for (std::size_t i = 0; i < b_list.size(); ++i) add(b_list[i], c_list[i]);
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      SweepItem& it = items[i];
      RunConfig cfg = base;
      cfg.p.b = it.b;
      cfg.gain_c = it.c;
      try {
        it.record = run_closed_loop(cfg);
        it.ok = true;
      } catch (const std::exception& e) {
        it.error = e.what();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, items.size());
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < workers; ++k) pool.emplace_back(worker);
  if (!items.empty()) worker();
  for (auto& th : pool) th.join();
  return items;
}

RunSummary summarize(const RunRecord& rec) {
  RunSummary s;
  if (rec.series.empty()) return s;
  const double s0 = rec.config.p.s_0;
  const double sr = rec.config.p.s_r;
  const double band = 0.05 * std::fabs(s0 - sr);
  s.min_inlet_T = std::numeric_limits<double>::infinity();
  s.max_inlet_T = -std::numeric_limits<double>::infinity();
  for (const SeriesRow& r : rec.series) {
    if (std::fabs(r.s - sr) > band) s.settling_time = r.t;
    s.peak_abs_qf = std::max(s.peak_abs_qf, std::fabs(r.q_f));
    s.min_inlet_T = std::min(s.min_inlet_T, r.Ts_inlet);
    s.max_inlet_T = std::max(s.max_inlet_T, r.Ts_inlet);
  }
  s.final_s = rec.series.back().s;
  s.final_rel_error = std::fabs(s.final_s - sr) / std::fabs(s0 - sr);
  s.validity_ok = rec.report.validity_pass();
  const double a = rec.report.valid_solid.t_first_violation;
  const double b = rec.report.valid_liquid.t_first_violation;
  if (!s.validity_ok) {
    s.first_violation_t = std::isnan(a) ? b : (std::isnan(b) ? a : std::min(a, b));
  }
  return s;
}

}  // namespace extruder
