#include "extruder/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include <json.hpp>

#include "extruder/errors.hpp"
#include "extruder/plot.hpp"

namespace extruder {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string path_in(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string g17(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string tag(double b, double c) {
  std::ostringstream os;
  os << "b" << b << "_c" << c;
  return os.str();
}

json fit_json(const NamedFit& f) {
  return {{"quantity", f.quantity}, {"t0", f.fit.t0},
          {"t1", f.fit.t1},         {"rate", f.fit.rate},
          {"theoretical", f.fit.theoretical}, {"ratio", f.fit.ratio},
          {"r2", f.fit.r2},         {"points", f.fit.points},
          {"conclusive", f.fit.conclusive()}, {"criterion", f.criterion},
          {"pass", f.pass}};
}

json summary_json(const RunRecord& rec) {
  const RunSummary s = summarize(rec);
  return {{"settling_time", s.settling_time},
          {"peak_abs_qf", s.peak_abs_qf},
          {"min_inlet_T", s.min_inlet_T},
          {"max_inlet_T", s.max_inlet_T},
          {"final_s", s.final_s},
          {"validity_ok", s.validity_ok},
          {"first_violation_t", s.first_violation_t},
          {"invariants_ok", rec.report.all_pass()},
          {"terminated_early", rec.terminated_early}};
}

}  // namespace

SteadyResult steady_command(const RunConfig& cfg, const std::string& out_dir) {
  validate(cfg);
  SteadyResult r;
  r.ss = solve_steady_state(cfg.m, cfg.p);
  r.bounds = barrel_temperature_bounds(cfg.m, cfg.p);
  const int n = std::max(cfg.grid_n, 201);
  r.solid_margin = std::numeric_limits<double>::infinity();
  r.liquid_margin = std::numeric_limits<double>::infinity();
  std::string csv = "x,T_eq,dT_eq_dx,phase\n";
  for (int i = 0; i < n; ++i) {
    const double x = cfg.p.L * i / (n - 1);
    const ProfileSample p = eval_steady_profile(r.ss, x);
    if (p.solid) {
      r.solid_margin = std::min(r.solid_margin, cfg.m.T_m - p.T);
    } else {
      r.liquid_margin = std::min(r.liquid_margin, p.T - cfg.m.T_m);
    }
    csv += g17(x) + "," + g17(p.T) + "," + g17(p.dTdx) + "," + (p.solid ? "solid" : "liquid") +
           "\n";
  }
  r.valid = r.solid_margin >= -cfg.eps_grid && r.liquid_margin >= -cfg.eps_grid;
  if (out_dir.empty()) return r;

  ensure_dir(out_dir);
  write_text(path_in(out_dir, "steady_profile.csv"), csv);
  json j = {{"q_f_star", r.ss.q_f_star},
            {"K", r.ss.K},
            {"s_r", r.ss.s_r},
            {"T_inlet", r.ss.solid(0.0)},
            {"T_nozzle", r.ss.liquid(r.ss.L)},
            {"exponents", {r.ss.q1, r.ss.q2, r.ss.q3, r.ss.q4}},
            {"barrel_bounds", {{"lower", r.bounds.lower}, {"upper", r.bounds.upper}}},
            {"T_b_minus_T_m", cfg.p.T_b - cfg.m.T_m},
            {"solid_margin", r.solid_margin},
            {"liquid_margin", r.liquid_margin},
            {"valid", r.valid}};
  write_text(path_in(out_dir, "steady.json"), j.dump(2) + "\n");

  PlotPanel p{"Equilibrium profile", "x [m]", "T [degC]", {}};
  PlotSeries solid{"solid", {}, {}, plot_color(0), false};
  PlotSeries liquid{"liquid", {}, {}, plot_color(3), false};
  for (int i = 0; i < n; ++i) {
    const double x = cfg.p.L * i / (n - 1);
    const ProfileSample s = eval_steady_profile(r.ss, x);
    (s.solid ? solid : liquid).x.push_back(x);
    (s.solid ? solid : liquid).y.push_back(s.T);
  }
  p.series = {solid, liquid};
  p.hline = cfg.m.T_m;
  p.hline_label = "T_m";
  write_text(path_in(out_dir, "steady_profile.svg"), render_svg({p}));
  return r;
}

GainsResult gains_command(const RunConfig& cfg, const std::string& out_dir) {
  validate(cfg);
  const SteadyState ss = solve_steady_state(cfg.m, cfg.p);
  GainsResult r;
  r.kernel = synthesize_kernel(cfg.m, cfg.p, ss, cfg.gain_c);
  const KernelFunctions& k = r.kernel;
  const int n = std::max(cfg.grid_n, 201);
  std::string csv = "x,phi_neg,f,g_neg\n";
  for (int i = 0; i < n; ++i) {
    const double x = cfg.p.s_r * i / (n - 1);
    r.max_residual = std::max(r.max_residual, std::fabs(k.residual(-x)));
    csv += g17(x) + "," + g17(k.phi(-x)) + "," + g17(k.f(x)) + "," + g17(k.g(-x)) + "\n";
  }
  const PlantState x0 =
      default_initial_condition(cfg.m, cfg.p, cfg.grid_n, cfg.T_s0_inlet, cfg.init_liquid);
  const ObserverState o0 = default_observer_initial(x0, cfg.obs_offset);
  r.setpoint_bound = setpoint_lower_bound(cfg.p, o0.That, k, cfg.m);
  r.setpoint_ok = cfg.p.s_r > r.setpoint_bound;
  if (out_dir.empty()) return r;

  ensure_dir(out_dir);
  write_text(path_in(out_dir, "gains.csv"), csv);
  json j = {{"c", k.c},         {"gamma", k.gamma},   {"beta_bar", k.beta},
            {"alpha_s", k.alpha}, {"h_s", k.h},        {"C", k.C},
            {"A", k.A},         {"b_bar", k.b_bar},   {"E", k.E},
            {"D", k.D},         {"d1", k.d1},         {"d2", k.d2},
            {"f_at_s_r", k.f(cfg.p.s_r)}, {"max_residual", r.max_residual},
            {"setpoint_bound", r.setpoint_bound},     {"setpoint_ok", r.setpoint_ok}};
  write_text(path_in(out_dir, "gains.json"), j.dump(2) + "\n");
  return r;
}

RunRecord run_command(const RunConfig& cfg, const std::string& out_dir) {
  RunRecord rec = run_closed_loop(cfg);
  if (!out_dir.empty()) write_run(out_dir, rec);
  return rec;
}

std::vector<SweepItem> sweep_command(const RunConfig& cfg, const std::string& out_dir) {
  std::vector<SweepItem> items = sweep(cfg, cfg.sweep_b, cfg.sweep_c, cfg.sweep_cross);
  if (out_dir.empty()) return items;
  ensure_dir(out_dir);
  std::string csv =
      "b,c,ok,settling_time,peak_abs_qf,min_inlet_T,max_inlet_T,final_s,validity_ok,"
      "invariants_ok,error\n";
  PlotPanel ps{"Interface position", "t [s]", "s [m]", {}};
  PlotPanel pq{"Inlet heat flux", "t [s]", "q_f [W/m^2]", {}};
  ps.hline = cfg.p.s_r;
  ps.hline_label = "s_r";
  for (std::size_t i = 0; i < items.size(); ++i) {
    const SweepItem& it = items[i];
    csv += g17(it.b) + "," + g17(it.c) + "," + (it.ok ? "1" : "0");
    if (it.ok) {
      write_run(path_in(out_dir, tag(it.b, it.c)), it.record);
      const RunSummary s = summarize(it.record);
      csv += "," + g17(s.settling_time) + "," + g17(s.peak_abs_qf) + "," + g17(s.min_inlet_T) +
             "," + g17(s.max_inlet_T) + "," + g17(s.final_s) + "," + (s.validity_ok ? "1" : "0") +
             "," + (it.record.report.all_pass() ? "1" : "0") + ",\n";
      PlotSeries a{tag(it.b, it.c), {}, {}, plot_color(i), false};
      PlotSeries q = a;
      for (const SeriesRow& r : it.record.series) {
        a.x.push_back(r.t);
        a.y.push_back(r.s);
        q.x.push_back(r.t);
        q.y.push_back(r.q_f);
      }
      ps.series.push_back(a);
      pq.series.push_back(q);
    } else {
      std::string err = it.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      csv += ",,,,,,,," + err + "\n";
    }
  }
  write_text(path_in(out_dir, "sweep_summary.csv"), csv);
  write_text(path_in(out_dir, "sweep_interface.svg"), render_svg({ps, pq}));
  return items;
}

Comparison compare_pi_command(const RunConfig& cfg, const std::string& out_dir) {
  if (cfg.Kp == 0.0 && cfg.Ki == 0.0) {
    throw ConfigError("compare-pi needs a PI gain pair: set Kp and/or Ki");
  }
  RunConfig bs = cfg;
  bs.controller = Controller::output_feedback;
  RunConfig pi = cfg;
  pi.controller = Controller::pi;
  Comparison c;
  c.backstepping = run_closed_loop(bs);
  c.pi = run_closed_loop(pi);
  c.contrast = c.backstepping.report.validity_pass() && !c.pi.report.validity_pass();
  if (out_dir.empty()) return c;

  ensure_dir(out_dir);
  write_run(path_in(out_dir, "backstepping"), c.backstepping);
  write_run(path_in(out_dir, "pi"), c.pi);
  json j = {{"Kp", cfg.Kp},
            {"Ki", cfg.Ki},
            {"contrast", c.contrast},
            {"backstepping", summary_json(c.backstepping)},
            {"pi", summary_json(c.pi)}};
  if (c.pi.terminated_early) j["pi"]["termination_reason"] = c.pi.termination_reason;
  write_text(path_in(out_dir, "comparison.json"), j.dump(2) + "\n");

  auto panel = [&](const std::string& title, const std::string& ylabel, double SeriesRow::*m) {
    PlotPanel p{title, "t [s]", ylabel, {}};
    PlotSeries a{"backstepping", {}, {}, plot_color(0), false};
    PlotSeries b{"PI", {}, {}, plot_color(3), true};
    for (const SeriesRow& r : c.backstepping.series) {
      a.x.push_back(r.t);
      a.y.push_back(r.*m);
    }
    for (const SeriesRow& r : c.pi.series) {
      b.x.push_back(r.t);
      b.y.push_back(r.*m);
    }
    p.series = {a, b};
    return p;
  };
  PlotPanel ps = panel("Interface position", "s [m]", &SeriesRow::s);
  ps.hline = cfg.p.s_r;
  ps.hline_label = "s_r";
  PlotPanel pq = panel("Inlet heat flux", "q_f [W/m^2]", &SeriesRow::q_f);
  PlotPanel pt = panel("Inlet solid temperature", "T_s(0) [degC]", &SeriesRow::Ts_inlet);
  pt.hline = cfg.m.T_m;
  pt.hline_label = "T_m";
  write_text(path_in(out_dir, "pi_comparison.svg"), render_svg({ps, pq, pt}));
  return c;
}

std::vector<LyapunovSample> lyapunov_trace(const RunRecord& rec) {
  struct Slice {
    std::vector<double> Ts, That;
    double s = 0.0, s_obs = 0.0;
  };
  std::map<double, Slice> slices;
  for (const SnapshotRow& r : rec.snapshots) {
    if (r.phase != "solid") continue;
    if (r.source == "plant") {
      Slice& sl = slices[r.t];
      sl.Ts.push_back(r.T);
      sl.s = std::max(sl.s, r.x);
    } else if (r.source == "observer") {
      Slice& sl = slices[r.t];
      sl.That.push_back(r.T);
      sl.s_obs = std::max(sl.s_obs, r.x);
    }
  }
  std::vector<LyapunovSample> out;
  const RunConfig& cfg = rec.config;
  const SteadyState ss = solve_steady_state(cfg.m, cfg.p);
  const KernelFunctions kf = synthesize_kernel(cfg.m, cfg.p, ss, cfg.gain_c);
  for (const auto& [t, sl] : slices) {
    if (sl.Ts.size() < 2 || sl.That.size() < 2) continue;
    const SolidProfile est{sl.That, sl.s_obs};
    const SolidProfile aligned = sl.s_obs == sl.s ? est : resample_profile(est, sl.s);
    LyapunovSample smp;
    smp.t = t;
    smp.V_tilde = lyapunov_observer(sl.Ts, aligned.T, sl.s, kf.gamma);
    smp.V_hat = lyapunov_closed_loop(kf, ss, est, sl.s);
    out.push_back(smp);
  }
  if (out.empty()) throw AnalysisError("lyapunov trace: record has no plant/observer snapshots");
  return out;
}

DecayFit fit_decay_window(const std::vector<double>& t, const std::vector<double>& y,
                          double rel_floor, double theoretical, double skip_fraction) {
  if (t.size() != y.size() || t.empty()) throw AnalysisError("decay fit: empty series");
  const std::size_t peak = static_cast<std::size_t>(
      std::max_element(y.begin(), y.end()) - y.begin());
  const double floor = rel_floor * y[peak];
  std::size_t end = peak;
  while (end < y.size() && y[end] > floor) ++end;
  const std::span<const double> tw(t.data() + peak, end - peak);
  const std::span<const double> yw(y.data() + peak, end - peak);
  return fit_decay_rate(tw, yw, skip_fraction, theoretical);
}

Analysis analyze_command(const std::string& run_dir, const std::string& out_dir) {
  RunRecord rec = read_run(run_dir);
  const RunConfig& cfg = rec.config;
  Analysis a;
  a.report = InvariantReport(cfg.eps_grid);
  for (const SeriesRow& row : rec.series) {
    record_invariants(a.report, row, cfg, rec.interface_checks);
  }
  const std::string inline_path = path_in(run_dir, "report.json");
  if (fs::exists(inline_path)) {
    a.has_inline_report = true;
    a.matches_inline = read_text(inline_path) == report_json(a.report) + "\n";
  }

  std::vector<double> t, vt, eh, ph;
  for (const SeriesRow& r : rec.series) {
    t.push_back(r.t);
    vt.push_back(r.V_tilde);
    eh.push_back(r.err_H1);
    ph.push_back(r.Phi_hat);
  }
  const Diffusivities d = derive_diffusivities(cfg.m);
  const double obs_bound = observer_rate_bound(d, cfg.p.b, cfg.p.L);
  const double cl_bound = closed_loop_rate_bound(d, cfg.p.b, cfg.p.s_r, cfg.gain_c);

  auto add_fit = [&](const std::string& name, const std::vector<double>& y, double floor,
                     double bound, double factor, bool scored) {
    try {
      NamedFit nf;
      nf.quantity = name;
      nf.fit = fit_decay_window(t, y, floor, bound);
      if (scored) {
        std::ostringstream os;
        os << "rate >= " << factor << " x theoretical";
        nf.criterion = os.str();
        nf.pass = nf.fit.rate >= factor * bound;
      } else {
        nf.criterion = "reported";
        nf.pass = true;
      }
      a.fits.push_back(nf);
    } catch (const Error& e) {
      a.warnings.push_back(name + ": " + e.what());
    }
  };
  // V_tilde is the squared weighted norm; its proven rate is the observer bound.
  if (!vt.empty() && vt.front() > 0.0) add_fit("V_tilde", vt, 1e-14, obs_bound, 0.8, true);
  if (!eh.empty() && eh.front() > 0.0) add_fit("err_H1", eh, 1e-7, obs_bound, 0.0, false);
  if (cfg.controller == Controller::output_feedback || cfg.controller == Controller::full_state) {
    add_fit("Phi_hat", ph, 1e-7, cl_bound, 0.5, true);
  }

  if (!vt.empty()) {
    const double slack = 1e-10 * vt.front();
    for (std::size_t i = 1; i < vt.size(); ++i) {
      if (vt[i] > vt[i - 1] + slack) ++a.V_tilde_increases;
    }
  }

  try {
    a.trace = lyapunov_trace(rec);
  } catch (const AnalysisError& e) {
    a.warnings.push_back(e.what());
  }

  if (out_dir.empty()) return a;
  ensure_dir(out_dir);
  json j;
  j["run_dir"] = run_dir;
  j["report"] = json::parse(report_json(a.report));
  j["has_inline_report"] = a.has_inline_report;
  j["matches_inline_report"] = a.matches_inline;
  json fits = json::array();
  for (const NamedFit& f : a.fits) fits.push_back(fit_json(f));
  j["fits"] = fits;
  j["V_tilde_increases"] = a.V_tilde_increases;
  j["warnings"] = a.warnings;
  write_text(path_in(out_dir, "analysis_report.json"), j.dump(2) + "\n");

  std::string csv = "quantity,t0,t1,rate,theoretical,ratio,r2,points,conclusive,criterion,pass\n";
  for (const NamedFit& f : a.fits) {
    csv += f.quantity + "," + g17(f.fit.t0) + "," + g17(f.fit.t1) + "," + g17(f.fit.rate) + "," +
           g17(f.fit.theoretical) + "," + g17(f.fit.ratio) + "," + g17(f.fit.r2) + "," +
           std::to_string(f.fit.points) + "," + (f.fit.conclusive() ? "1" : "0") + "," +
           f.criterion + "," + (f.pass ? "1" : "0") + "\n";
  }
  write_text(path_in(out_dir, "decay_fits.csv"), csv);

  if (!a.trace.empty()) {
    std::string tr = "t,V_tilde,V_hat,V1,V2,V3,p\n";
    for (const LyapunovSample& s : a.trace) {
      tr += g17(s.t) + "," + g17(s.V_tilde) + "," + g17(s.V_hat.V) + "," + g17(s.V_hat.V1) + "," +
            g17(s.V_hat.V2) + "," + g17(s.V_hat.V3) + "," + g17(s.V_hat.p) + "\n";
    }
    write_text(path_in(out_dir, "lyapunov_trace.csv"), tr);
  }
  return a;
}

}  // namespace extruder
