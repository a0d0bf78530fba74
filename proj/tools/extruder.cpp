// Command-line front end. Talks to the library only through extruder.h.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "extruder/extruder.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitInvariant = 4;

struct Options {
  std::string config;
  std::string out;
  std::string run_dir;
  std::vector<std::string> overrides;
  bool strict = false;
};

int exit_code(ext_status s) {
  switch (s) {
    case EXT_OK: return kExitOk;
    case EXT_ERR_CONFIG:
    case EXT_ERR_GAIN:
    case EXT_ERR_ARGUMENT: return kExitConfig;
    case EXT_ERR_SOLVER: return kExitSolver;
    case EXT_ERR_INVARIANT: return kExitInvariant;
    default: return kExitOther;
  }
}

int report_error(const char* what, ext_status s) {
  std::fprintf(stderr, "error (%s): %s: %s\n", ext_status_name(s), what, ext_last_error());
  return exit_code(s);
}

// Owns a config handle built from --config plus --override entries.
class Config {
 public:
  ~Config() { ext_config_free(h_); }
  ext_config* get() const { return h_; }

  int build(const Options& o) {
    ext_status s =
        o.config.empty() ? ext_config_default(&h_) : ext_config_load(o.config.c_str(), &h_);
    if (s != EXT_OK) return report_error("loading config", s);
    for (const std::string& kv : o.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "error (config): override '%s' is not key=value\n", kv.c_str());
        return kExitConfig;
      }
      s = ext_config_set(h_, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
      if (s != EXT_OK) return report_error("applying override", s);
    }
    s = ext_config_validate(h_);
    if (s != EXT_OK) return report_error("validating config", s);
    return kExitOk;
  }

  std::string value(const char* key) const {
    size_t n = 0;
    if (ext_config_get(h_, key, nullptr, 0, &n) != EXT_OK) return {};
    std::string v(n, '\0');
    ext_config_get(h_, key, v.data(), n, &n);
    v.resize(n - 1);
    return v;
  }

 private:
  ext_config* h_ = nullptr;
};

std::string out_dir(const Options& o, const Config& c, const char* sub) {
  if (!o.out.empty()) return o.out;
  return c.value("output_dir") + "/" + sub;
}

void print_summary(const char* label, const ext_run_summary& r) {
  std::printf("%s:\n", label);
  std::printf("  settling_time      %.6g s\n", r.settling_time);
  std::printf("  final_s            %.6g m (rel. error %.3g)\n", r.final_s, r.final_rel_error);
  std::printf("  peak |q_f|         %.6g W/m^2\n", r.peak_abs_qf);
  std::printf("  inlet T range      [%.6g, %.6g] degC\n", r.min_inlet_T, r.max_inlet_T);
  if (r.validity_ok) {
    std::printf("  validity           ok\n");
  } else {
    std::printf("  validity           VIOLATED first at t = %.6g s\n", r.first_violation_t);
  }
  std::printf("  invariants         %s\n", r.invariants_ok ? "ok" : "FAILED");
  std::printf("  steps              %ld accepted, %ld rejected, %ld rhs evals\n", r.steps_accepted,
              r.steps_rejected, r.rhs_evals);
  if (r.terminated_early) std::printf("  terminated early   yes\n");
}

int cmd_steady(const Options& o) {
  Config c;
  if (int rc = c.build(o)) return rc;
  const std::string dir = out_dir(o, c, "steady");
  ext_steady_info i{};
  if (ext_status s = ext_steady(c.get(), dir.c_str(), &i)) return report_error("steady", s);
  std::printf("q_f*          %.10g W/m^2\n", i.q_f_star);
  std::printf("K             %.10g W/m^2\n", i.K);
  std::printf("s_r           %.10g m\n", i.s_r);
  std::printf("T_s,eq(0)     %.10g degC\n", i.T_inlet);
  std::printf("T_l,eq(L)     %.10g degC\n", i.T_nozzle);
  std::printf("exponents     q1 %.6g  q2 %.6g  q3 %.6g  q4 %.6g 1/m\n", i.q1, i.q2, i.q3, i.q4);
  std::printf("T_b - T_m in  [%.6g, %.6g]\n", i.bound_lower, i.bound_upper);
  std::printf("margins       solid %.6g  liquid %.6g  -> %s\n", i.solid_margin, i.liquid_margin,
              i.valid ? "valid" : "INVALID");
  std::printf("wrote %s\n", dir.c_str());
  return (o.strict && !i.valid) ? kExitInvariant : kExitOk;
}

int cmd_gains(const Options& o) {
  Config c;
  if (int rc = c.build(o)) return rc;
  const std::string dir = out_dir(o, c, "gains");
  ext_gains_info g{};
  if (ext_status s = ext_gains(c.get(), dir.c_str(), &g)) return report_error("gains", s);
  std::printf("c        %.10g 1/s\n", g.c);
  std::printf("gamma    %.10g 1/m\n", g.gamma);
  std::printf("C        %.10g\n", g.C);
  std::printf("A        %.10g\n", g.A);
  std::printf("E        %.10g\n", g.E);
  std::printf("D        %.10g\n", g.D);
  std::printf("d1       %.10g\n", g.d1);
  std::printf("d2       %.10g\n", g.d2);
  std::printf("f(s_r)   %.10g\n", g.f_at_s_r);
  std::printf("max kernel residual  %.3g\n", g.max_residual);
  std::printf("setpoint lower bound %.10g m (%s)\n", g.setpoint_bound,
              g.setpoint_ok ? "s_r admissible" : "s_r NOT admissible");
  std::printf("wrote %s\n", dir.c_str());
  return (o.strict && !g.setpoint_ok) ? kExitInvariant : kExitOk;
}

int cmd_run(const Options& o) {
  Config c;
  if (int rc = c.build(o)) return rc;
  const std::string dir = out_dir(o, c, "run");
  ext_run* r = nullptr;
  if (ext_status s = ext_run_create(c.get(), dir.c_str(), &r)) return report_error("run", s);
  ext_run_summary sum{};
  ext_run_summary_get(r, &sum);
  print_summary(("run (" + c.value("controller") + ")").c_str(), sum);
  for (size_t i = 0; i < ext_run_warning_count(r); ++i) {
    std::fprintf(stderr, "warning: %s\n", ext_run_warning(r, i));
  }
  if (sum.terminated_early) std::fprintf(stderr, "warning: %s\n", ext_run_termination(r));
  std::printf("wrote %s\n", dir.c_str());
  ext_run_free(r);
  return (o.strict && !sum.invariants_ok) ? kExitInvariant : kExitOk;
}

int cmd_sweep(const Options& o) {
  Config c;
  if (int rc = c.build(o)) return rc;
  const std::string dir = out_dir(o, c, "sweep");
  ext_sweep* sw = nullptr;
  if (ext_status s = ext_sweep_run(c.get(), dir.c_str(), &sw)) return report_error("sweep", s);
  bool any_failed = false, any_invalid = false;
  std::printf("%10s %8s %12s %14s %12s %10s\n", "b [m/s]", "c", "settle [s]", "peak|q_f|",
              "min T(0)", "status");
  for (size_t i = 0; i < ext_sweep_count(sw); ++i) {
    ext_sweep_item it{};
    ext_sweep_item_get(sw, i, &it);
    if (!it.ok) {
      any_failed = true;
      std::printf("%10.4g %8.4g %12s %14s %12s %10s\n", it.b, it.c, "-", "-", "-", "failed");
      std::fprintf(stderr, "run b=%g c=%g failed: %s\n", it.b, it.c, ext_sweep_item_error(sw, i));
      continue;
    }
    any_invalid |= !it.summary.invariants_ok;
    std::printf("%10.4g %8.4g %12.6g %14.6g %12.6g %10s\n", it.b, it.c, it.summary.settling_time,
                it.summary.peak_abs_qf, it.summary.min_inlet_T,
                it.summary.invariants_ok ? "ok" : "violated");
  }
  if (ext_sweep_count(sw) == 0) std::printf("(empty sweep)\n");
  ext_sweep_free(sw);
  std::printf("wrote %s\n", dir.c_str());
  if (any_failed) return kExitSolver;
  return (o.strict && any_invalid) ? kExitInvariant : kExitOk;
}

int cmd_compare(const Options& o) {
  Config c;
  if (int rc = c.build(o)) return rc;
  const std::string dir = out_dir(o, c, "compare_pi");
  ext_comparison cmp{};
  if (ext_status s = ext_compare_pi(c.get(), dir.c_str(), &cmp)) {
    return report_error("compare-pi", s);
  }
  print_summary("backstepping", cmp.backstepping);
  print_summary(("PI (Kp " + c.value("Kp") + ", Ki " + c.value("Ki") + ")").c_str(), cmp.pi);
  std::printf("contrast (PI violates, backstepping valid): %s\n", cmp.contrast ? "yes" : "no");
  std::printf("wrote %s\n", dir.c_str());
  return (o.strict && !cmp.backstepping.invariants_ok) ? kExitInvariant : kExitOk;
}

int cmd_analyze(const Options& o) {
  std::string run_dir = o.run_dir;
  std::string dir = o.out;
  if (run_dir.empty() || dir.empty()) {
    Config c;
    if (int rc = c.build(o)) return rc;
    if (run_dir.empty()) run_dir = c.value("output_dir") + "/run";
    if (dir.empty()) dir = run_dir + "/analysis";
  }
  ext_analysis* a = nullptr;
  if (ext_status s = ext_analyze(run_dir.c_str(), dir.c_str(), &a)) {
    return report_error("analyze", s);
  }
  ext_analysis_info info{};
  ext_analysis_info_get(a, &info);
  std::printf("run directory      %s\n", run_dir.c_str());
  std::printf("invariants         %s\n", info.invariants_ok ? "ok" : "FAILED");
  if (info.has_inline_report) {
    std::printf("inline report      %s\n", info.matches_inline ? "reproduced" : "MISMATCH");
  }
  std::printf("V_tilde increases  %ld\n", info.V_tilde_increases);
  for (size_t i = 0; i < info.fit_count; ++i) {
    ext_fit f{};
    ext_analysis_fit(a, i, &f);
    std::printf("fit %-8s rate %.6g 1/s over [%.4g, %.4g] s, ", f.quantity, f.rate, f.t0, f.t1);
    std::printf("bound %.6g, ratio %.3g, r2 %.4f -> %s\n", f.theoretical, f.ratio, f.r2,
                f.pass ? "pass" : "FAIL");
  }
  for (size_t i = 0; i < info.warning_count; ++i) {
    std::fprintf(stderr, "warning: %s\n", ext_analysis_warning(a, i));
  }
  ext_analysis_free(a);
  std::printf("wrote %s\n", dir.c_str());
  return (o.strict && !info.invariants_ok) ? kExitInvariant : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Screw extruder phase-change simulation and boundary control"};
  app.set_version_flag("--version", std::string(ext_version()));
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("--config,-c", o.config, "Configuration file (key = value)");
    if (need_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out,-o", o.out, "Output directory");
    sub->add_option("--override", o.overrides, "key=value applied after the file")
        ->allow_extra_args(false);
    sub->add_flag("--strict", o.strict, "Exit with 4 when invariant checks fail");
  };

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const Options&);
  };
  const Sub subs[] = {
      {"steady", "Equilibrium profile and barrel-temperature bounds", cmd_steady},
      {"gains", "Backstepping kernel and gain functions", cmd_gains},
      {"run", "Closed-loop simulation", cmd_run},
      {"sweep", "Runs over screw speeds and gains", cmd_sweep},
      {"compare-pi", "Backstepping against a PI baseline", cmd_compare},
      {"analyze", "Invariant report and decay fits of a stored run", cmd_analyze},
  };
  int (*chosen)(const Options&) = nullptr;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    const bool is_analyze = std::string(s.name) == "analyze";
    common(sub, !is_analyze);
    if (is_analyze) sub->add_option("--run", o.run_dir, "Run directory to analyze");
    sub->callback([&chosen, fn = s.fn] { chosen = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  return chosen ? chosen(o) : kExitConfig;
}
