#include "extruder/extruder.h"

#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "extruder/commands.hpp"
#include "extruder/errors.hpp"

using namespace extruder;

struct ext_config {
  RunConfig cfg;
};

struct ext_run {
  RunRecord rec;
  std::string report;
};

struct ext_sweep {
  std::vector<SweepItem> items;
};

struct ext_analysis {
  Analysis a;
  std::string report;
};

namespace {

thread_local std::string g_last_error;

ext_status fail(ext_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs f, translating library exceptions into status codes.
template <class F>
ext_status guard(F&& f) {
  try {
    g_last_error.clear();
    f();
    return EXT_OK;
  } catch (const ConfigError& e) {
    return fail(EXT_ERR_CONFIG, e.what());
  } catch (const SolverError& e) {
    return fail(EXT_ERR_SOLVER, e.what());
  } catch (const DegenerateDomainError& e) {
    return fail(EXT_ERR_SOLVER, e.what());
  } catch (const ResampleError& e) {
    return fail(EXT_ERR_SOLVER, e.what());
  } catch (const DomainError& e) {
    return fail(EXT_ERR_DOMAIN, e.what());
  } catch (const GridError& e) {
    return fail(EXT_ERR_DOMAIN, e.what());
  } catch (const GainError& e) {
    return fail(EXT_ERR_GAIN, e.what());
  } catch (const IoError& e) {
    return fail(EXT_ERR_IO, e.what());
  } catch (const AnalysisError& e) {
    return fail(EXT_ERR_ANALYSIS, e.what());
  } catch (const std::bad_alloc&) {
    return fail(EXT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(EXT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(EXT_ERR_INTERNAL, "unknown error");
  }
}

ext_status null_arg(const char* what) {
  return fail(EXT_ERR_ARGUMENT, std::string("null argument: ") + what);
}

std::string dir_or_empty(const char* d) { return d ? std::string(d) : std::string(); }

ext_run_summary to_c(const RunRecord& rec) {
  const RunSummary s = summarize(rec);
  ext_run_summary o{};
  o.settling_time = s.settling_time;
  o.peak_abs_qf = s.peak_abs_qf;
  o.min_inlet_T = s.min_inlet_T;
  o.max_inlet_T = s.max_inlet_T;
  o.final_s = s.final_s;
  o.final_rel_error = s.final_rel_error;
  o.first_violation_t = s.first_violation_t;
  o.validity_ok = s.validity_ok;
  o.invariants_ok = rec.report.all_pass();
  o.terminated_early = rec.terminated_early;
  o.steps_accepted = rec.stats.accepted;
  o.steps_rejected = rec.stats.rejected;
  o.rhs_evals = rec.stats.rhs_evals;
  return o;
}

double SeriesRow::*column(const char* name) {
  static const std::pair<const char*, double SeriesRow::*> cols[] = {
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
  for (const auto& [n, m] : cols) {
    if (std::strcmp(n, name) == 0) return m;
  }
  return nullptr;
}

}  // namespace

extern "C" {

const char* ext_version(void) { return "1.0.0"; }

const char* ext_last_error(void) { return g_last_error.c_str(); }

const char* ext_status_name(ext_status s) {
  switch (s) {
    case EXT_OK: return "ok";
    case EXT_ERR_CONFIG: return "config";
    case EXT_ERR_SOLVER: return "solver";
    case EXT_ERR_INVARIANT: return "invariant";
    case EXT_ERR_DOMAIN: return "domain";
    case EXT_ERR_GAIN: return "gain";
    case EXT_ERR_IO: return "io";
    case EXT_ERR_ANALYSIS: return "analysis";
    case EXT_ERR_ARGUMENT: return "argument";
    case EXT_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

ext_status ext_config_default(ext_config** out) {
  if (!out) return null_arg("out");
  return guard([&] { *out = new ext_config{}; });
}

ext_status ext_config_load(const char* path, ext_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guard([&] { *out = new ext_config{load_config(path)}; });
}

ext_status ext_config_parse(const char* text, ext_config** out) {
  if (!text) return null_arg("text");
  if (!out) return null_arg("out");
  return guard([&] { *out = new ext_config{parse_config(text)}; });
}

ext_status ext_config_set(ext_config* cfg, const char* key, const char* value) {
  if (!cfg) return null_arg("cfg");
  if (!key || !value) return null_arg("key/value");
  return guard([&] { apply_setting(cfg->cfg, key, value); });
}

ext_status ext_config_get(const ext_config* cfg, const char* key, char* buf, size_t len,
                          size_t* needed) {
  if (!cfg) return null_arg("cfg");
  if (!key) return null_arg("key");
  for (const auto& [k, v] : config_entries(cfg->cfg)) {
    if (k != key) continue;
    if (needed) *needed = v.size() + 1;
    if (!buf) return EXT_OK;
    if (len < v.size() + 1) return fail(EXT_ERR_ARGUMENT, "buffer too small for '" + k + "'");
    std::memcpy(buf, v.c_str(), v.size() + 1);
    return EXT_OK;
  }
  return fail(EXT_ERR_CONFIG, std::string("unknown key '") + key + "'");
}

ext_status ext_config_validate(const ext_config* cfg) {
  if (!cfg) return null_arg("cfg");
  return guard([&] { validate(cfg->cfg); });
}

void ext_config_free(ext_config* cfg) { delete cfg; }

ext_status ext_steady(const ext_config* cfg, const char* out_dir, ext_steady_info* info) {
  if (!cfg) return null_arg("cfg");
  if (!info) return null_arg("info");
  return guard([&] {
    const SteadyResult r = steady_command(cfg->cfg, dir_or_empty(out_dir));
    *info = ext_steady_info{};
    info->q_f_star = r.ss.q_f_star;
    info->K = r.ss.K;
    info->s_r = r.ss.s_r;
    info->T_inlet = r.ss.solid(0.0);
    info->T_nozzle = r.ss.liquid(r.ss.L);
    info->q1 = r.ss.q1;
    info->q2 = r.ss.q2;
    info->q3 = r.ss.q3;
    info->q4 = r.ss.q4;
    info->bound_lower = r.bounds.lower;
    info->bound_upper = r.bounds.upper;
    info->solid_margin = r.solid_margin;
    info->liquid_margin = r.liquid_margin;
    info->valid = r.valid;
  });
}

ext_status ext_gains(const ext_config* cfg, const char* out_dir, ext_gains_info* info) {
  if (!cfg) return null_arg("cfg");
  if (!info) return null_arg("info");
  return guard([&] {
    const GainsResult r = gains_command(cfg->cfg, dir_or_empty(out_dir));
    const KernelFunctions& k = r.kernel;
    *info = ext_gains_info{};
    info->c = k.c;
    info->gamma = k.gamma;
    info->C = k.C;
    info->A = k.A;
    info->E = k.E;
    info->D = k.D;
    info->d1 = k.d1;
    info->d2 = k.d2;
    info->f_at_s_r = k.f(cfg->cfg.p.s_r);
    info->max_residual = r.max_residual;
    info->setpoint_bound = r.setpoint_bound;
    info->setpoint_ok = r.setpoint_ok;
  });
}

ext_status ext_run_create(const ext_config* cfg, const char* out_dir, ext_run** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  return guard([&] {
    auto* r = new ext_run{run_command(cfg->cfg, dir_or_empty(out_dir)), {}};
    r->report = report_json(r->rec.report);
    *out = r;
  });
}

size_t ext_run_length(const ext_run* run) { return run ? run->rec.series.size() : 0; }

ext_status ext_run_series(const ext_run* run, const char* name, double* out, size_t n) {
  if (!run) return null_arg("run");
  if (!name || !out) return null_arg("column/out");
  double SeriesRow::*m = column(name);
  if (!m) return fail(EXT_ERR_ARGUMENT, std::string("unknown column '") + name + "'");
  const size_t k = std::min(n, run->rec.series.size());
  for (size_t i = 0; i < k; ++i) out[i] = run->rec.series[i].*m;
  return EXT_OK;
}

ext_status ext_run_summary_get(const ext_run* run, ext_run_summary* out) {
  if (!run) return null_arg("run");
  if (!out) return null_arg("out");
  return guard([&] { *out = to_c(run->rec); });
}

const char* ext_run_report(const ext_run* run) { return run ? run->report.c_str() : ""; }

size_t ext_run_warning_count(const ext_run* run) { return run ? run->rec.warnings.size() : 0; }

const char* ext_run_warning(const ext_run* run, size_t i) {
  if (!run || i >= run->rec.warnings.size()) return "";
  return run->rec.warnings[i].c_str();
}

const char* ext_run_termination(const ext_run* run) {
  return run ? run->rec.termination_reason.c_str() : "";
}

ext_status ext_run_write(const ext_run* run, const char* dir) {
  if (!run) return null_arg("run");
  if (!dir) return null_arg("dir");
  return guard([&] { write_run(dir, run->rec); });
}

void ext_run_free(ext_run* run) { delete run; }

ext_status ext_sweep_run(const ext_config* cfg, const char* out_dir, ext_sweep** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  return guard([&] { *out = new ext_sweep{sweep_command(cfg->cfg, dir_or_empty(out_dir))}; });
}

size_t ext_sweep_count(const ext_sweep* sw) { return sw ? sw->items.size() : 0; }

ext_status ext_sweep_item_get(const ext_sweep* sw, size_t i, ext_sweep_item* out) {
  if (!sw) return null_arg("sweep");
  if (!out) return null_arg("out");
  if (i >= sw->items.size()) return fail(EXT_ERR_ARGUMENT, "sweep index out of range");
  return guard([&] {
    const SweepItem& it = sw->items[i];
    *out = ext_sweep_item{};
    out->b = it.b;
    out->c = it.c;
    out->ok = it.ok;
    if (it.ok) out->summary = to_c(it.record);
  });
}

const char* ext_sweep_item_error(const ext_sweep* sw, size_t i) {
  if (!sw || i >= sw->items.size()) return "";
  return sw->items[i].error.c_str();
}

void ext_sweep_free(ext_sweep* sw) { delete sw; }

ext_status ext_compare_pi(const ext_config* cfg, const char* out_dir, ext_comparison* out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  return guard([&] {
    const Comparison c = compare_pi_command(cfg->cfg, dir_or_empty(out_dir));
    out->backstepping = to_c(c.backstepping);
    out->pi = to_c(c.pi);
    out->contrast = c.contrast;
  });
}

ext_status ext_analyze(const char* run_dir, const char* out_dir, ext_analysis** out) {
  if (!run_dir) return null_arg("run_dir");
  if (!out) return null_arg("out");
  return guard([&] {
    auto* a = new ext_analysis{analyze_command(run_dir, dir_or_empty(out_dir)), {}};
    a->report = report_json(a->a.report);
    *out = a;
  });
}

ext_status ext_analysis_info_get(const ext_analysis* a, ext_analysis_info* out) {
  if (!a) return null_arg("analysis");
  if (!out) return null_arg("out");
  out->has_inline_report = a->a.has_inline_report;
  out->matches_inline = a->a.matches_inline;
  out->invariants_ok = a->a.report.all_pass();
  out->V_tilde_increases = a->a.V_tilde_increases;
  out->fit_count = a->a.fits.size();
  out->trace_length = a->a.trace.size();
  out->warning_count = a->a.warnings.size();
  return EXT_OK;
}

ext_status ext_analysis_fit(const ext_analysis* a, size_t i, ext_fit* out) {
  if (!a) return null_arg("analysis");
  if (!out) return null_arg("out");
  if (i >= a->a.fits.size()) return fail(EXT_ERR_ARGUMENT, "fit index out of range");
  const NamedFit& f = a->a.fits[i];
  *out = ext_fit{};
  std::strncpy(out->quantity, f.quantity.c_str(), sizeof(out->quantity) - 1);
  out->t0 = f.fit.t0;
  out->t1 = f.fit.t1;
  out->rate = f.fit.rate;
  out->theoretical = f.fit.theoretical;
  out->ratio = f.fit.ratio;
  out->r2 = f.fit.r2;
  out->points = f.fit.points;
  out->conclusive = f.fit.conclusive();
  out->pass = f.pass;
  return EXT_OK;
}

const char* ext_analysis_report(const ext_analysis* a) { return a ? a->report.c_str() : ""; }

const char* ext_analysis_warning(const ext_analysis* a, size_t i) {
  if (!a || i >= a->a.warnings.size()) return "";
  return a->a.warnings[i].c_str();
}

void ext_analysis_free(ext_analysis* a) { delete a; }

}  // extern "C"
