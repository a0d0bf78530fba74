#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <cmath>
#include <filesystem>
#include <map>

#include "extruder/commands.hpp"
#include "extruder/errors.hpp"
#include "extruder/io.hpp"
#include "extruder/simulation.hpp"
#include "support.hpp"

using namespace extruder;
namespace fs = std::filesystem;

namespace {

RunConfig short_run(double t_end = 20.0) {
  RunConfig cfg;
  cfg.m.hbar_s = cfg.m.hbar_l = 2e4;
  cfg.t_end = t_end;
  cfg.snapshot_every = t_end / 2.0;
  cfg.grid_n = 41;
  return cfg;
}

// Plant state rebuilt from the snapshot rows at time t.
PlantState plant_at(const RunRecord& rec, double t) {
  std::vector<std::pair<double, double>> solid, liquid;
  for (const SnapshotRow& r : rec.snapshots) {
    if (r.source != "plant" || r.t != t) continue;
    (r.phase == "solid" ? solid : liquid).emplace_back(r.x, r.T);
  }
  REQUIRE(!solid.empty());
  REQUIRE(!liquid.empty());
  std::sort(solid.begin(), solid.end());
  std::sort(liquid.begin(), liquid.end());
  PlantState x;
  for (const auto& [pos, T] : solid) x.Ts.T.push_back(T);
  for (const auto& [pos, T] : liquid) x.Tl.T.push_back(T);
  x.Tl.L = liquid.back().first;
  x.set_interface(solid.back().first);
  return x;
}

std::vector<double> snapshot_times(const RunRecord& rec) {
  std::vector<double> t;
  for (const SnapshotRow& r : rec.snapshots) {
    if (r.source == "plant" && (t.empty() || t.back() != r.t)) t.push_back(r.t);
  }
  return t;
}

bool same_series(const std::vector<SeriesRow>& a, const std::vector<SeriesRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const SeriesRow &x = a[i], &y = b[i];
    const double lhs[] = {x.t,  x.s,  x.q_f, x.Ts_inlet, x.sdot, x.solid_margin, x.liquid_margin,
                          x.That_inlet, x.under_margin, x.err_L2, x.err_H1, x.dev_H1,
                          x.Phi_hat, x.Z, x.V_tilde, x.V_hat};
    const double rhs[] = {y.t,  y.s,  y.q_f, y.Ts_inlet, y.sdot, y.solid_margin, y.liquid_margin,
                          y.That_inlet, y.under_margin, y.err_L2, y.err_H1, y.dev_H1,
                          y.Phi_hat, y.Z, y.V_tilde, y.V_hat};
    for (std::size_t k = 0; k < std::size(lhs); ++k) {
      if (std::memcmp(&lhs[k], &rhs[k], sizeof(double)) != 0) return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("series and snapshot CSV round trip is exact") {
    const RunRecord rec = run_closed_loop(short_run());
    const std::string dir = testing_support::scratch_dir("io_roundtrip");
    write_series_csv(dir + "/series.csv", rec.series, rec.config.eps_grid);
    write_snapshots_csv(dir + "/snapshots.csv", rec.snapshots);
    CHECK(same_series(read_series_csv(dir + "/series.csv"), rec.series));
    const std::vector<SnapshotRow> snaps = read_snapshots_csv(dir + "/snapshots.csv");
    REQUIRE(snaps.size() == rec.snapshots.size());
    for (std::size_t i = 0; i < snaps.size(); ++i) {
      CHECK(snaps[i].t == rec.snapshots[i].t);
      CHECK(snaps[i].x == rec.snapshots[i].x);
      CHECK(snaps[i].T == rec.snapshots[i].T);
      CHECK(snaps[i].phase == rec.snapshots[i].phase);
      CHECK(snaps[i].source == rec.snapshots[i].source);
    }
  }

  TEST_CASE("run directory round trip") {
    const RunRecord rec = run_closed_loop(short_run());
    const std::string dir = testing_support::scratch_dir("io_run");
    write_run(dir, rec);
    for (const char* f : {"run.json", "series.csv", "snapshots.csv", "report.json",
                          "interface.svg", "heat_flux.svg", "inlet_temperature.svg",
                          "profiles.svg"}) {
      CAPTURE(f);
      CHECK(fs::exists(fs::path(dir) / f));
    }
    const RunRecord back = read_run(dir);
    CHECK(back.format == kRunFormat);
    CHECK(same_series(back.series, rec.series));
    CHECK(back.snapshots.size() == rec.snapshots.size());
    CHECK(render_config(back.config) == render_config(rec.config));
    CHECK(back.stats.accepted == rec.stats.accepted);
  }

  TEST_CASE("unreadable run directories") {
    CHECK_THROWS_AS(read_run(testing_support::scratch_dir("io_empty")), IoError);
    const std::string dir = testing_support::scratch_dir("io_badtag");
    write_run(dir, run_closed_loop(short_run(2.0)), false);
    std::string meta = read_text(dir + "/run.json");
    const auto at = meta.find(kRunFormat);
    REQUIRE(at != std::string::npos);
    meta.replace(at, std::string(kRunFormat).size(), "extruder-run/0");
    write_text(dir + "/run.json", meta);
    CHECK_THROWS_AS(read_run(dir), IoError);
  }

  TEST_CASE("profiles plot is skipped without snapshots") {
    RunConfig cfg = short_run();
    cfg.snapshot_every = 0.0;
    RunRecord rec = run_closed_loop(cfg);
    rec.snapshots.clear();
    const std::string dir = testing_support::scratch_dir("io_noplot");
    const std::vector<std::string> warnings = emit_plots(dir, rec);
    CHECK_FALSE(fs::exists(fs::path(dir) / "profiles.svg"));
    CHECK(fs::exists(fs::path(dir) / "interface.svg"));
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("profiles.svg") != std::string::npos);
  }

  TEST_CASE("analyze reproduces the inline report") {
    const std::string dir = testing_support::scratch_dir("io_analyze");
    const RunRecord rec = run_command(short_run(), dir);
    const Analysis a = analyze_command(dir, dir + "/analysis");
    CHECK(a.has_inline_report);
    CHECK(a.matches_inline);
    CHECK(report_json(a.report) == report_json(rec.report));
    CHECK(fs::exists(fs::path(dir) / "analysis" / "analysis_report.json"));
    CHECK(fs::exists(fs::path(dir) / "analysis" / "decay_fits.csv"));
    CHECK(fs::exists(fs::path(dir) / "analysis" / "lyapunov_trace.csv"));
    CHECK(a.trace.size() == snapshot_times(rec).size());
  }
}

TEST_SUITE("simulation") {
  TEST_CASE("runs are bit-for-bit deterministic") {
    const RunConfig cfg = short_run();
    const RunRecord a = run_closed_loop(cfg);
    const RunRecord b = run_closed_loop(cfg);
    CHECK(same_series(a.series, b.series));
    CHECK(a.stats.rhs_evals == b.stats.rhs_evals);
  }

  TEST_CASE("open loop does not hold the interface") {
    RunConfig cfg = short_run(2700.0);
    cfg.controller = Controller::open_loop;
    cfg.grid_n = 101;
    bool converged = false;
    try {
      const RunRecord rec = run_closed_loop(cfg);
      converged = summarize(rec).final_rel_error < 0.05;
    } catch (const DegenerateDomainError&) {
      converged = false;
    }
    CHECK_FALSE(converged);
  }

  TEST_CASE("uniform melt-temperature state stays put") {
    RunConfig cfg = short_run(50.0);
    cfg.p.T_b = cfg.m.T_m;
    cfg.p.q_m_star = 0.0;
    cfg.T_s0_inlet = cfg.m.T_m;
    cfg.obs_offset = 0.0;
    cfg.controller = Controller::open_loop;
    const RunRecord rec = run_closed_loop(cfg);
    for (const SeriesRow& r : rec.series) {
      CHECK(r.s == cfg.p.s_0);
      CHECK(r.q_f == 0.0);
      CHECK(r.Ts_inlet == cfg.m.T_m);
      CHECK(r.sdot == 0.0);
    }
  }

  TEST_CASE("enthalpy is conserved without advection, barrel or nozzle flux") {
    RunConfig cfg;
    cfg.p.b = 0.0;
    cfg.p.q_m_star = 0.0;
    cfg.controller = Controller::open_loop;
    cfg.t_end = 600.0;
    cfg.snapshot_every = 200.0;
    const RunRecord rec = run_closed_loop(cfg);
    REQUIRE(rec.series.back().q_f == 0.0);
    const std::vector<double> times = snapshot_times(rec);
    REQUIRE(times.size() == 4);
    const double H0 = total_enthalpy(plant_at(rec, times.front()), cfg.m);
    const double H1 = total_enthalpy(plant_at(rec, times.back()), cfg.m);
    CHECK(plant_at(rec, times.back()).s > cfg.p.s_0);  // the cold solid freezes melt
    CHECK(std::fabs(H1 - H0) < 1e-3 * std::fabs(H0));
  }

  TEST_CASE("the default estimate stays below the plant") {
    RunConfig cfg;
    cfg.p.b = 0.05;
    cfg.gain_c = 5.0;
    cfg.p.s_0 = 0.001;
    cfg.t_end = 0.5;
    cfg.snapshot_every = 0.1;
    const RunRecord rec = run_closed_loop(cfg);
    CHECK(rec.report.underestimate.enabled);
    CHECK(rec.report.underestimate.pass());
    CHECK(rec.report.underestimate.worst >= -cfg.eps_grid);
    for (const SeriesRow& r : rec.series) CHECK(r.That_inlet <= r.Ts_inlet + cfg.eps_grid);
    // Estimation error falls by orders of magnitude within half a second.
    CHECK(rec.series.back().err_H1 < 0.02 * rec.series.front().err_H1);
  }

  TEST_CASE("sweeps") {
    RunConfig base = short_run(5.0);
    CHECK(sweep(base, {}, {}, false).empty());
    CHECK_THROWS_AS(sweep(base, {0.002, 0.01}, {0.2}, false), ConfigError);

    const auto paired = sweep(base, {0.002, 0.01, 0.05}, {0.2, 1.0, 5.0}, false);
    REQUIRE(paired.size() == 3);
    for (const SweepItem& it : paired) {
      CHECK(it.ok);
      CHECK(it.record.config.p.b == it.b);
      CHECK(it.record.config.gain_c == it.c);
    }
    CHECK(paired[1].b == 0.01);
    CHECK(paired[1].c == 1.0);

    const auto cross = sweep(base, {0.002, 0.01, 0.05}, {0.2, 1.0, 5.0}, true);
    REQUIRE(cross.size() == 9);
    std::map<std::pair<double, double>, int> seen;
    for (const SweepItem& it : cross) ++seen[{it.b, it.c}];
    CHECK(seen.size() == 9);

    // One failing member does not stop the others.
    const auto mixed = sweep(base, {0.002, 0.01}, {0.2, -1.0}, false);
    CHECK(mixed[0].ok);
    CHECK_FALSE(mixed[1].ok);
    CHECK_FALSE(mixed[1].error.empty());

    // Sweeps match individual runs exactly.
    RunConfig single = base;
    single.p.b = 0.01;
    single.gain_c = 1.0;
    CHECK(same_series(run_closed_loop(single).series, paired[1].record.series));
  }

  TEST_CASE("summary") {
    RunRecord rec;
    rec.config.p.s_0 = 0.02;
    rec.config.p.s_r = 0.05;
    auto row = [](double t, double s, double q, double T) {
      SeriesRow r;
      r.t = t;
      r.s = s;
      r.q_f = q;
      r.Ts_inlet = T;
      return r;
    };
    rec.series = {row(0, 0.02, -10, 100), row(1, 0.045, 30, 120), row(2, 0.049, -5, 110),
                  row(3, 0.0502, 0, 111)};
    const RunSummary s = summarize(rec);
    CHECK(s.settling_time == 1.0);
    CHECK(s.peak_abs_qf == 30.0);
    CHECK(s.min_inlet_T == 100.0);
    CHECK(s.max_inlet_T == 120.0);
    CHECK(s.final_s == 0.0502);
    CHECK(s.final_rel_error == doctest::Approx(0.0002 / 0.03));
    CHECK(s.validity_ok);
    CHECK(s.first_violation_t == -1.0);
  }
}
