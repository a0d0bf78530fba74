#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "extruder/integrator.hpp"
#include "extruder/params.hpp"
#include "extruder/plant.hpp"

namespace extruder {

enum class Controller { output_feedback, full_state, pi, open_loop };
enum class SdotSource { plant, finite_difference };
enum class ControlUpdate { continuous, sample_hold };
enum class SetpointCheck { enforce, warn, off };

struct RunConfig {
  MaterialParams m;
  ProcessParams p;
  double gain_c = 0.2;

  // Discretization and solver.
  int grid_n = 101;
  StepControl step{1e-8, 1e-6, 1e-4, 1e-12, 1.0};
  double t_end = 900.0;
  double snapshot_every = 60.0;
  double log_every = 0.0;  // minimum spacing of time-series rows; 0 logs every step
  double s_min = -1.0;     // negative: 1e-4 L

  // Initial data.
  double T_s0_inlet = 100.0;
  LiquidInit init_liquid = LiquidInit::linear;
  double obs_offset = 5.0;

  // Control.
  Controller controller = Controller::output_feedback;
  ControlUpdate control_update = ControlUpdate::continuous;
  SdotSource sdot_source = SdotSource::plant;
  SetpointCheck setpoint_check = SetpointCheck::warn;
  double Kp = 0.0;
  double Ki = 0.0;
  double q_f_min = -std::numeric_limits<double>::infinity();
  double q_f_max = std::numeric_limits<double>::infinity();

  // Invariant tolerances: temperatures (K), interface speed (m/s), position (m).
  double eps_grid = 0.02;  // 3x the worst n = 101 discrete steady error, rounded up
  double eps_sdot = 1e-7;
  double eps_s = 1e-6;
  double eps_Z_rel = 1e-8;  // Z floor, relative to Z(0)

  // Sweep.
  std::vector<double> sweep_b;
  std::vector<double> sweep_c;
  bool sweep_cross = false;

  std::string output_dir = "out";  // used when the command line gives no --out

  double resolved_s_min() const { return s_min > 0.0 ? s_min : 1e-4 * p.L; }
};

/// Every accepted key with its current value, in a stable order.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);

/// Sets one key. Unknown keys and malformed values raise ConfigError.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Parses flat "key = value" text; '#' starts a comment.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Cross-field checks (parameter orderings, solver bounds, grid size).
void validate(const RunConfig& cfg);

/// key=value rendering that parse_config reads back to the same values.
std::string render_config(const RunConfig& cfg);

const char* to_string(Controller c);
const char* to_string(SdotSource s);
const char* to_string(ControlUpdate u);

}  // namespace extruder
