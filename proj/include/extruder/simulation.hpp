#pragma once

#include <string>
#include <vector>

#include "extruder/analysis.hpp"
#include "extruder/config.hpp"
#include "extruder/control.hpp"
#include "extruder/integrator.hpp"
#include "extruder/observer.hpp"
#include "extruder/plant.hpp"
#include "extruder/steady_state.hpp"

namespace extruder {

inline constexpr const char* kRunFormat = "extruder-run/1";

struct SeriesRow {
  double t = 0.0;
  double s = 0.0;
  double q_f = 0.0;
  double Ts_inlet = 0.0;
  double sdot = 0.0;
  double solid_margin = 0.0;   // min(T_m - T_s)
  double liquid_margin = 0.0;  // min(T_l - T_m)
  double That_inlet = 0.0;
  double under_margin = 0.0;   // min(T_s - That)
  double err_L2 = 0.0;         // ||T_s - That||
  double err_H1 = 0.0;
  double dev_H1 = 0.0;         // ||T_s - T_s,eq||_H1
  double Phi_hat = 0.0;        // dev_H1 + err_H1 + |s - s_r|
  double Z = 0.0;
  double V_tilde = 0.0;
  double V_hat = 0.0;
};

struct SnapshotRow {
  double t = 0.0;
  double x = 0.0;
  double T = 0.0;
  std::string phase;   // solid | liquid
  std::string source;  // plant | observer | steady
};

struct RunRecord {
  std::string format = kRunFormat;
  RunConfig config;
  std::vector<SeriesRow> series;
  std::vector<SnapshotRow> snapshots;
  InvariantReport report;
  IntegratorStats stats;
  SteadyState steady;
  double setpoint_bound = 0.0;
  bool setpoint_ok = true;
  bool interface_checks = false;  // assumption-dependent checks enabled
  std::vector<std::string> warnings;
  // Set when the solver gave up after the model had already left its validity
  // region; the record up to that point is kept.
  bool terminated_early = false;
  std::string termination_reason;

  RunRecord() : report(0.0) {}
};

/// Whether the interface invariant checks (sdot >= 0, s in band, Z > 0) apply:
/// T_b = T_m, q_m* = 0, observer-based control, observer started below the plant.
bool interface_checks_apply(const RunConfig& cfg);

/// Co-integrates plant, observer and the selected law in one stiff system.
/// Throws ConfigError, SolverError, DegenerateDomainError, GainError. A solver
/// failure after a recorded validity violation ends the run instead.
RunRecord run_closed_loop(const RunConfig& cfg);

/// Updates the report with one logged sample; used inline and by analyze.
void record_invariants(InvariantReport& rep, const SeriesRow& row, const RunConfig& cfg,
                       bool interface_checks);

struct SweepItem {
  double b = 0.0;
  double c = 0.0;
  bool ok = false;
  std::string error;
  RunRecord record;
};

/// Paired (b_i, c_i) or cross-product runs. Each run is isolated: a failure is
/// reported in its item and does not stop the others.
std::vector<SweepItem> sweep(const RunConfig& base, const std::vector<double>& b_list,
                             const std::vector<double>& c_list, bool cross);

struct RunSummary {
  double settling_time = 0.0;  // last time |s - s_r| > 5% |s_0 - s_r| (0 if never)
  double peak_abs_qf = 0.0;
  double min_inlet_T = 0.0;
  double max_inlet_T = 0.0;
  double final_s = 0.0;
  double final_rel_error = 0.0;  // |s - s_r| / |s_0 - s_r| at the end
  bool validity_ok = true;
  double first_violation_t = -1.0;
};

RunSummary summarize(const RunRecord& rec);

}  // namespace extruder
