#pragma once

#include <string>
#include <vector>

#include "extruder/simulation.hpp"

namespace extruder {

// Run directory layout:
//   run.json        format tag, config echo, solver stats, summary
//   series.csv      one row per logged sample
//   snapshots.csv   long-format profiles (t, x, T, phase, source)
//   report.json     invariant report computed inline
//   *.svg           plots

/// valid_solid / valid_liquid flags are the margins tested against eps_grid.
void write_series_csv(const std::string& path, const std::vector<SeriesRow>& rows,
                      double eps_grid);
std::vector<SeriesRow> read_series_csv(const std::string& path);

void write_snapshots_csv(const std::string& path, const std::vector<SnapshotRow>& rows);
std::vector<SnapshotRow> read_snapshots_csv(const std::string& path);

std::string report_json(const InvariantReport& rep, int indent = 2);

/// Writes every file of a run into dir (created if needed). Throws IoError.
void write_run(const std::string& dir, const RunRecord& rec, bool plots = true);

/// Reads run.json, series.csv and snapshots.csv back. The report is left
/// empty; analyze recomputes it. Throws IoError on missing files or a
/// format tag from another emitter version.
RunRecord read_run(const std::string& dir);

/// Plots of one run: interface.svg, heat_flux.svg, inlet_temperature.svg and,
/// when snapshots exist, profiles.svg. Returns warnings (e.g. skipped plots).
std::vector<std::string> emit_plots(const std::string& dir, const RunRecord& rec);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);
void ensure_dir(const std::string& dir);

}  // namespace extruder
