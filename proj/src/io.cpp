#include "extruder/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "extruder/errors.hpp"
#include "extruder/plot.hpp"

namespace extruder {
namespace {

using json = nlohmann::json;

// Shortest representation that reads back to the same double.
void put(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

double get(const std::string& field, const std::string& path, std::size_t line) {
  double v = 0.0;
  const char* b = field.data();
  const char* e = b + field.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) {
    std::ostringstream os;
    os << path << ":" << line << ": bad number '" << field << "'";
    throw IoError(os.str());
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct Column {
  const char* name;
  double SeriesRow::*member;
};

// valid_solid / valid_liquid sit after sdot; they are derived from the margins.
const std::vector<Column>& series_columns() {
  static const std::vector<Column> cols = {
      {"t", &SeriesRow::t},
      {"s", &SeriesRow::s},
      {"q_f", &SeriesRow::q_f},
      {"Ts_inlet", &SeriesRow::Ts_inlet},
      {"sdot", &SeriesRow::sdot},
      {"solid_margin", &SeriesRow::solid_margin},
      {"liquid_margin", &SeriesRow::liquid_margin},
      {"That_inlet", &SeriesRow::That_inlet},
      {"under_margin", &SeriesRow::under_margin},
      {"err_L2", &SeriesRow::err_L2},
      {"err_H1", &SeriesRow::err_H1},
      {"dev_H1", &SeriesRow::dev_H1},
      {"Phi_hat", &SeriesRow::Phi_hat},
      {"Z", &SeriesRow::Z},
      {"V_tilde", &SeriesRow::V_tilde},
      {"V_hat", &SeriesRow::V_hat},
  };
  return cols;
}

json check_json(const InvariantCheck& c) {
  json j;
  j["name"] = c.name;
  j["enabled"] = c.enabled;
  j["pass"] = c.pass();
  j["tol"] = c.tol;
  j["violations"] = c.violations;
  if (std::isfinite(c.worst)) {
    j["worst_margin"] = c.worst;
    j["t_worst"] = c.t_worst;
  } else {
    j["worst_margin"] = nullptr;
    j["t_worst"] = nullptr;
  }
  j["t_first_violation"] = std::isnan(c.t_first_violation) ? json(nullptr)
                                                           : json(c.t_first_violation);
  return j;
}

json steady_json(const SteadyState& ss) {
  return {{"q_f_star", ss.q_f_star}, {"K", ss.K},       {"s_r", ss.s_r},
          {"T_inlet", ss.solid(0.0)}, {"T_nozzle", ss.liquid(ss.L)},
          {"q1", ss.q1},             {"q2", ss.q2},     {"q3", ss.q3},
          {"q4", ss.q4},             {"solid_linear", ss.solid_linear},
          {"liquid_linear", ss.liquid_linear}};
}

PlotSeries series_of(const RunRecord& rec, double SeriesRow::*m, const std::string& label,
                     std::size_t color) {
  PlotSeries s;
  s.label = label;
  s.color = plot_color(color);
  for (const SeriesRow& r : rec.series) {
    s.x.push_back(r.t);
    s.y.push_back(r.*m);
  }
  return s;
}

}  // namespace

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << text;
  if (!f) throw IoError("write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_series_csv(const std::string& path, const std::vector<SeriesRow>& rows,
                      double eps_grid) {
  const auto& cols = series_columns();
  std::string out = "t,s,q_f,Ts_inlet,sdot,valid_solid,valid_liquid";
  for (std::size_t k = 5; k < cols.size(); ++k) {
    out += ',';
    out += cols[k].name;
  }
  out += '\n';
  for (const SeriesRow& r : rows) {
    for (std::size_t k = 0; k < 5; ++k) {
      if (k) out += ',';
      put(out, r.*cols[k].member);
    }
    out += r.solid_margin >= -eps_grid ? ",1" : ",0";
    out += r.liquid_margin >= -eps_grid ? ",1" : ",0";
    for (std::size_t k = 5; k < cols.size(); ++k) {
      out += ',';
      put(out, r.*cols[k].member);
    }
    out += '\n';
  }
  write_text(path, out);
}

std::vector<SeriesRow> read_series_csv(const std::string& path) {
  std::istringstream is(read_text(path));
  std::string line;
  if (!std::getline(is, line)) throw IoError(path + ": empty file");
  const std::vector<std::string> header = split(line);
  std::vector<double SeriesRow::*> slots(header.size(), nullptr);
  std::size_t found = 0;
  for (std::size_t i = 0; i < header.size(); ++i) {
    for (const Column& c : series_columns()) {
      if (header[i] == c.name) {
        slots[i] = c.member;
        ++found;
      }
    }
  }
  if (found != series_columns().size()) {
    throw IoError(path + ": header lacks required columns");
  }
  std::vector<SeriesRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != header.size()) {
      std::ostringstream os;
      os << path << ":" << lineno << ": expected " << header.size() << " fields, got "
         << cells.size();
      throw IoError(os.str());
    }
    SeriesRow r;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (slots[i]) r.*slots[i] = get(cells[i], path, lineno);
    }
    if (!rows.empty() && r.t < rows.back().t) {
      std::ostringstream os;
      os << path << ":" << lineno << ": time column is not monotone";
      throw IoError(os.str());
    }
    rows.push_back(r);
  }
  return rows;
}

void write_snapshots_csv(const std::string& path, const std::vector<SnapshotRow>& rows) {
  std::string out = "t,x,T,phase,source\n";
  for (const SnapshotRow& r : rows) {
    put(out, r.t);
    out += ',';
    put(out, r.x);
    out += ',';
    put(out, r.T);
    out += ',' + r.phase + ',' + r.source + '\n';
  }
  write_text(path, out);
}

std::vector<SnapshotRow> read_snapshots_csv(const std::string& path) {
  std::istringstream is(read_text(path));
  std::string line;
  if (!std::getline(is, line) || line != "t,x,T,phase,source") {
    throw IoError(path + ": unexpected header");
  }
  std::vector<SnapshotRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> c = split(line);
    if (c.size() != 5) {
      std::ostringstream os;
      os << path << ":" << lineno << ": expected 5 fields";
      throw IoError(os.str());
    }
    rows.push_back({get(c[0], path, lineno), get(c[1], path, lineno), get(c[2], path, lineno),
                    c[3], c[4]});
  }
  return rows;
}

std::string report_json(const InvariantReport& rep, int indent) {
  json j;
  j["eps_grid"] = rep.eps_grid;
  j["samples"] = rep.samples;
  j["all_pass"] = rep.all_pass();
  j["validity_pass"] = rep.validity_pass();
  json checks = json::array();
  for (const InvariantCheck* c : rep.checks()) checks.push_back(check_json(*c));
  j["checks"] = checks;
  return j.dump(indent);
}

void write_run(const std::string& dir, const RunRecord& rec, bool plots) {
  ensure_dir(dir);
  const std::filesystem::path d(dir);
  write_series_csv((d / "series.csv").string(), rec.series, rec.config.eps_grid);
  write_snapshots_csv((d / "snapshots.csv").string(), rec.snapshots);
  write_text((d / "report.json").string(), report_json(rec.report) + "\n");

  json j;
  j["format"] = rec.format;
  json cfg = json::object();
  for (const auto& [k, v] : config_entries(rec.config)) cfg[k] = v;
  j["config"] = cfg;
  j["steady"] = steady_json(rec.steady);
  j["stats"] = {{"accepted", rec.stats.accepted},
                {"rejected", rec.stats.rejected},
                {"rhs_evals", rec.stats.rhs_evals},
                {"jacobians", rec.stats.jacobians}};
  j["setpoint_bound"] = rec.setpoint_bound;
  j["setpoint_ok"] = rec.setpoint_ok;
  j["interface_checks"] = rec.interface_checks;
  j["warnings"] = rec.warnings;
  j["terminated_early"] = rec.terminated_early;
  j["termination_reason"] = rec.termination_reason;
  const RunSummary s = summarize(rec);
  j["summary"] = {{"settling_time", s.settling_time},
                  {"peak_abs_qf", s.peak_abs_qf},
                  {"min_inlet_T", s.min_inlet_T},
                  {"max_inlet_T", s.max_inlet_T},
                  {"final_s", s.final_s},
                  {"final_rel_error", s.final_rel_error},
                  {"validity_ok", s.validity_ok},
                  {"first_violation_t", s.first_violation_t}};
  write_text((d / "run.json").string(), j.dump(2) + "\n");
  if (plots) emit_plots(dir, rec);
}

RunRecord read_run(const std::string& dir) {
  const std::filesystem::path d(dir);
  json j;
  try {
    j = json::parse(read_text((d / "run.json").string()));
  } catch (const json::exception& e) {
    throw IoError(dir + "/run.json: " + e.what());
  }
  RunRecord rec;
  rec.format = j.value("format", std::string());
  if (rec.format != kRunFormat) {
    throw IoError(dir + "/run.json: format '" + rec.format + "' is not " + kRunFormat);
  }
  try {
    for (const auto& [k, v] : j.at("config").items()) {
      apply_setting(rec.config, k, v.get<std::string>());
    }
    rec.setpoint_bound = j.value("setpoint_bound", 0.0);
    rec.setpoint_ok = j.value("setpoint_ok", true);
    rec.interface_checks = j.value("interface_checks", false);
    rec.warnings = j.value("warnings", std::vector<std::string>{});
    rec.terminated_early = j.value("terminated_early", false);
    rec.termination_reason = j.value("termination_reason", std::string());
    if (j.contains("stats")) {
      const json& st = j.at("stats");
      rec.stats.accepted = st.value("accepted", 0L);
      rec.stats.rejected = st.value("rejected", 0L);
      rec.stats.rhs_evals = st.value("rhs_evals", 0L);
      rec.stats.jacobians = st.value("jacobians", 0L);
    }
  } catch (const json::exception& e) {
    throw IoError(dir + "/run.json: " + e.what());
  }
  rec.steady = solve_steady_state(rec.config.m, rec.config.p);
  rec.series = read_series_csv((d / "series.csv").string());
  const auto snaps = d / "snapshots.csv";
  if (std::filesystem::exists(snaps)) rec.snapshots = read_snapshots_csv(snaps.string());
  rec.report = InvariantReport(rec.config.eps_grid);
  return rec;
}

std::vector<std::string> emit_plots(const std::string& dir, const RunRecord& rec) {
  std::vector<std::string> warnings;
  const std::filesystem::path d(dir);
  const double Tm = rec.config.m.T_m;

  PlotPanel s{"Interface position", "t [s]", "s [m]", {series_of(rec, &SeriesRow::s, "s(t)", 0)}};
  s.hline = rec.config.p.s_r;
  s.hline_label = "s_r";
  write_text((d / "interface.svg").string(), render_svg({s}));

  PlotPanel q{"Inlet heat flux", "t [s]", "q_f [W/m^2]",
              {series_of(rec, &SeriesRow::q_f, "q_f(t)", 0)}};
  write_text((d / "heat_flux.svg").string(), render_svg({q}));

  PlotPanel ti{"Inlet solid temperature",
               "t [s]",
               "T [degC]",
               {series_of(rec, &SeriesRow::Ts_inlet, "plant T_s(0)", 0),
                series_of(rec, &SeriesRow::That_inlet, "estimate", 1)}};
  ti.series[1].dashed = true;
  ti.hline = Tm;
  ti.hline_label = "T_m";
  write_text((d / "inlet_temperature.svg").string(), render_svg({ti}));

  std::vector<double> times;
  for (const SnapshotRow& r : rec.snapshots) {
    if (r.source != "steady" && (times.empty() || times.back() != r.t)) times.push_back(r.t);
  }
  if (times.empty()) {
    warnings.push_back("no profile snapshots; profiles.svg skipped");
    return warnings;
  }
  // At most six overlay times, evenly picked, always keeping first and last.
  std::vector<double> pick;
  const std::size_t want = std::min<std::size_t>(6, times.size());
  for (std::size_t k = 0; k < want; ++k) {
    const std::size_t i = want == 1 ? 0 : k * (times.size() - 1) / (want - 1);
    pick.push_back(times[i]);
  }
  PlotPanel pr{"Temperature profiles (solid: plant, dashed: estimate)", "x [m]", "T [degC]", {}};
  pr.hline = Tm;
  pr.hline_label = "T_m";
  for (std::size_t k = 0; k < pick.size(); ++k) {
    std::ostringstream lab;
    lab << "t=" << pick[k] << " s";
    PlotSeries plant{lab.str(), {}, {}, plot_color(k), false};
    PlotSeries est{"", {}, {}, plot_color(k), true};
    for (const SnapshotRow& r : rec.snapshots) {
      if (r.t != pick[k]) continue;
      if (r.source == "plant") {
        plant.x.push_back(r.x);
        plant.y.push_back(r.T);
      } else if (r.source == "observer") {
        est.x.push_back(r.x);
        est.y.push_back(r.T);
      }
    }
    pr.series.push_back(plant);
    if (!est.x.empty()) pr.series.push_back(est);
  }
  PlotSeries steady{"equilibrium", {}, {}, "#999999", true};
  for (const SnapshotRow& r : rec.snapshots) {
    if (r.source == "steady") {
      steady.x.push_back(r.x);
      steady.y.push_back(r.T);
    }
  }
  if (!steady.x.empty()) pr.series.push_back(steady);
  write_text((d / "profiles.svg").string(), render_svg({pr}, 820, 420));
  return warnings;
}

}  // namespace extruder
