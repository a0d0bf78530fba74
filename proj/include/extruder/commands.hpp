#pragma once

#include <string>
#include <vector>

#include "extruder/io.hpp"
#include "extruder/simulation.hpp"

namespace extruder {

// Each command computes its result and, when out_dir is non-empty, writes its
// files there.

struct SteadyResult {
  SteadyState ss;
  BarrelBounds bounds;
  double solid_margin = 0.0;   // min over x < s_r of T_m - T_s,eq
  double liquid_margin = 0.0;  // min over x > s_r of T_l,eq - T_m
  bool valid = true;
};

/// steady_profile.csv, steady.json, steady_profile.svg
SteadyResult steady_command(const RunConfig& cfg, const std::string& out_dir);

struct GainsResult {
  KernelFunctions kernel;
  double max_residual = 0.0;  // scaled kernel-equation residual on (-s_r, 0)
  double setpoint_bound = 0.0;
  bool setpoint_ok = true;
};

/// gains.json, gains.csv (x, phi(-x), f(x), g(-x) for x in [0, s_r])
GainsResult gains_command(const RunConfig& cfg, const std::string& out_dir);

RunRecord run_command(const RunConfig& cfg, const std::string& out_dir);

/// sweep_summary.csv, one run directory per item, sweep_interface.svg.
/// Lists come from cfg.sweep_b / cfg.sweep_c / cfg.sweep_cross.
std::vector<SweepItem> sweep_command(const RunConfig& cfg, const std::string& out_dir);

struct Comparison {
  RunRecord backstepping;
  RunRecord pi;
  bool contrast = false;  // PI loses validity, backstepping keeps it
};

/// backstepping/ and pi/ run directories, comparison.json, pi_comparison.svg.
/// Needs nonzero Kp or Ki in cfg.
Comparison compare_pi_command(const RunConfig& cfg, const std::string& out_dir);

struct NamedFit {
  std::string quantity;
  DecayFit fit;
  std::string criterion;  // human-readable acceptance rule
  bool pass = false;
};

struct LyapunovSample {
  double t = 0.0;
  double V_tilde = 0.0;
  ClosedLoopLyapunov V_hat;
};

/// Observer and closed-loop functionals at each snapshot time. Throws
/// AnalysisError when the record has no plant/observer snapshots.
std::vector<LyapunovSample> lyapunov_trace(const RunRecord& rec);

/// Fits log(y) over [argmax y, first sample below rel_floor * max y), skipping
/// the leading skip_fraction of that window.
DecayFit fit_decay_window(const std::vector<double>& t, const std::vector<double>& y,
                          double rel_floor, double theoretical, double skip_fraction = 0.1);

struct Analysis {
  InvariantReport report;
  bool has_inline_report = false;
  bool matches_inline = false;
  std::vector<NamedFit> fits;
  long V_tilde_increases = 0;  // consecutive-sample increases above 1e-10 V_tilde(0)
  std::vector<LyapunovSample> trace;
  std::vector<std::string> warnings;
};

/// Recomputes the invariant report and decay fits from a run directory.
/// Writes analysis_report.json, decay_fits.csv and lyapunov_trace.csv.
Analysis analyze_command(const std::string& run_dir, const std::string& out_dir);

}  // namespace extruder
