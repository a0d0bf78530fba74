#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "extruder/extruder.h"

namespace fs = std::filesystem;

namespace {

std::string scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("extruder_capi_" + name);
  fs::remove_all(dir);
  return dir.string();
}

ext_config* quick_config(double t_end = 10.0) {
  ext_config* cfg = nullptr;
  REQUIRE(ext_config_default(&cfg) == EXT_OK);
  REQUIRE(ext_config_set(cfg, "t_end", std::to_string(t_end).c_str()) == EXT_OK);
  REQUIRE(ext_config_set(cfg, "grid_n", "41") == EXT_OK);
  REQUIRE(ext_config_set(cfg, "hbar_s", "2e4") == EXT_OK);
  REQUIRE(ext_config_set(cfg, "hbar_l", "2e4") == EXT_OK);
  REQUIRE(ext_config_set(cfg, "snapshot_every", "5") == EXT_OK);
  return cfg;
}

}  // namespace

TEST_SUITE("capi") {
  TEST_CASE("version and status names") {
    CHECK(std::string(ext_version()) == "1.0.0");
    CHECK(std::string(ext_status_name(EXT_OK)) != "");
    CHECK(std::string(ext_status_name(EXT_ERR_SOLVER)) != std::string(ext_status_name(EXT_OK)));
  }

  TEST_CASE("configuration handles") {
    ext_config* cfg = nullptr;
    REQUIRE(ext_config_default(&cfg) == EXT_OK);
    size_t need = 0;
    CHECK(ext_config_get(cfg, "b", nullptr, 0, &need) == EXT_OK);
    CHECK(need > 1);
    std::vector<char> buf(need);
    CHECK(ext_config_get(cfg, "b", buf.data(), buf.size(), &need) == EXT_OK);
    CHECK(std::stod(buf.data()) == 0.002);
    char tiny[1];
    CHECK(ext_config_get(cfg, "b", tiny, 1, &need) == EXT_ERR_ARGUMENT);

    CHECK(ext_config_set(cfg, "b", "0.01") == EXT_OK);
    CHECK(ext_config_get(cfg, "b", buf.data(), buf.size(), &need) == EXT_OK);
    CHECK(std::stod(buf.data()) == 0.01);

    CHECK(ext_config_set(cfg, "no_such_key", "1") == EXT_ERR_CONFIG);
    CHECK(std::string(ext_last_error()).find("no_such_key") != std::string::npos);
    CHECK(ext_config_set(cfg, "b", "fast") == EXT_ERR_CONFIG);
    CHECK(ext_config_get(cfg, "nope", buf.data(), buf.size(), &need) == EXT_ERR_CONFIG);

    CHECK(ext_config_set(cfg, "s_0", "0.08") == EXT_OK);
    CHECK(ext_config_validate(cfg) == EXT_ERR_CONFIG);
    ext_config_free(cfg);

    ext_config* parsed = nullptr;
    CHECK(ext_config_parse("b = 0.05\n# comment\ngain_c = 5\n", &parsed) == EXT_OK);
    CHECK(ext_config_validate(parsed) == EXT_OK);
    ext_config_free(parsed);
    ext_config* broken = nullptr;
    CHECK(ext_config_parse("b 0.05\n", &broken) == EXT_ERR_CONFIG);
    CHECK(broken == nullptr);
    CHECK(ext_config_load("/nonexistent/extruder.cfg", &broken) != EXT_OK);
  }

  TEST_CASE("null arguments are rejected, not dereferenced") {
    CHECK(ext_config_default(nullptr) == EXT_ERR_ARGUMENT);
    CHECK(ext_config_set(nullptr, "b", "1") == EXT_ERR_ARGUMENT);
    CHECK(ext_config_validate(nullptr) == EXT_ERR_ARGUMENT);
    ext_steady_info si;
    CHECK(ext_steady(nullptr, nullptr, &si) == EXT_ERR_ARGUMENT);
    ext_run* run = nullptr;
    CHECK(ext_run_create(nullptr, nullptr, &run) == EXT_ERR_ARGUMENT);
    CHECK(ext_run_length(nullptr) == 0);
    CHECK(ext_run_series(nullptr, "t", nullptr, 0) == EXT_ERR_ARGUMENT);
    CHECK(std::string(ext_run_report(nullptr)).empty());
    CHECK(ext_analyze(nullptr, nullptr, nullptr) == EXT_ERR_ARGUMENT);
    ext_config_free(nullptr);
    ext_run_free(nullptr);
    ext_sweep_free(nullptr);
    ext_analysis_free(nullptr);
  }

  TEST_CASE("steady state and gains") {
    ext_config* cfg = quick_config();
    ext_steady_info si;
    REQUIRE(ext_steady(cfg, nullptr, &si) == EXT_OK);
    CHECK(si.q_f_star == doctest::Approx(-27.14635963).epsilon(1e-8));
    CHECK(si.valid == 1);
    CHECK(si.bound_upper == doctest::Approx(81.046).epsilon(1e-4));

    ext_gains_info gi;
    REQUIRE(ext_gains(cfg, nullptr, &gi) == EXT_OK);
    CHECK(gi.c == 0.2);
    CHECK(gi.D > 0.0);
    CHECK(gi.max_residual < 1e-9);
    CHECK(gi.setpoint_ok == 1);

    CHECK(ext_config_set(cfg, "gain_c", "-1") == EXT_OK);
    const ext_status st = ext_gains(cfg, nullptr, &gi);
    CHECK((st == EXT_ERR_GAIN || st == EXT_ERR_CONFIG));
    ext_config_free(cfg);
  }

  TEST_CASE("runs, series and summaries") {
    ext_config* cfg = quick_config();
    const std::string dir = scratch("run");
    ext_run* run = nullptr;
    REQUIRE(ext_run_create(cfg, dir.c_str(), &run) == EXT_OK);
    CHECK(fs::exists(fs::path(dir) / "series.csv"));
    const size_t n = ext_run_length(run);
    REQUIRE(n > 2);
    std::vector<double> t(n), s(n);
    CHECK(ext_run_series(run, "t", t.data(), n) == EXT_OK);
    CHECK(ext_run_series(run, "s", s.data(), n) == EXT_OK);
    CHECK(t.front() == 0.0);
    CHECK(t.back() == 10.0);
    CHECK(s.front() == 0.02);
    CHECK(ext_run_series(run, "bogus", t.data(), n) == EXT_ERR_ARGUMENT);

    ext_run_summary sum;
    REQUIRE(ext_run_summary_get(run, &sum) == EXT_OK);
    CHECK(sum.final_s == s.back());
    CHECK(sum.validity_ok == 1);
    CHECK(sum.first_violation_t == -1.0);
    CHECK(sum.steps_accepted > 0);
    CHECK(std::string(ext_run_report(run)).find("\"all_pass\"") != std::string::npos);
    CHECK(std::string(ext_run_termination(run)).empty());

    const std::string copy = scratch("run_copy");
    CHECK(ext_run_write(run, copy.c_str()) == EXT_OK);
    ext_analysis* a = nullptr;
    REQUIRE(ext_analyze(copy.c_str(), (copy + "/analysis").c_str(), &a) == EXT_OK);
    ext_analysis_info info;
    REQUIRE(ext_analysis_info_get(a, &info) == EXT_OK);
    CHECK(info.has_inline_report == 1);
    CHECK(info.matches_inline == 1);
    CHECK(info.trace_length == 3);
    for (size_t i = 0; i < info.fit_count; ++i) {
      ext_fit f;
      CHECK(ext_analysis_fit(a, i, &f) == EXT_OK);
      CHECK(std::strlen(f.quantity) > 0);
    }
    ext_fit f;
    CHECK(ext_analysis_fit(a, info.fit_count, &f) == EXT_ERR_ARGUMENT);
    ext_analysis_free(a);
    ext_run_free(run);
    ext_config_free(cfg);

    CHECK(ext_analyze(scratch("missing").c_str(), nullptr, &a) == EXT_ERR_IO);
  }

  TEST_CASE("solver failures map to their status") {
    ext_config* cfg = nullptr;
    REQUIRE(ext_config_parse("controller = open_loop\nt_end = 2700\n", &cfg) == EXT_OK);
    ext_run* run = nullptr;
    CHECK(ext_run_create(cfg, nullptr, &run) == EXT_ERR_SOLVER);
    CHECK(run == nullptr);
    CHECK(std::string(ext_last_error()).find("degenerate") != std::string::npos);
    ext_config_free(cfg);
  }

  TEST_CASE("sweeps") {
    ext_config* cfg = quick_config(3.0);
    REQUIRE(ext_config_set(cfg, "sweep_b", "0.002, 0.01") == EXT_OK);
    REQUIRE(ext_config_set(cfg, "sweep_c", "0.2, -1") == EXT_OK);
    ext_sweep* sw = nullptr;
    REQUIRE(ext_sweep_run(cfg, nullptr, &sw) == EXT_OK);
    REQUIRE(ext_sweep_count(sw) == 2);
    ext_sweep_item it;
    CHECK(ext_sweep_item_get(sw, 0, &it) == EXT_OK);
    CHECK(it.ok == 1);
    CHECK(it.b == 0.002);
    CHECK(ext_sweep_item_get(sw, 1, &it) == EXT_OK);
    CHECK(it.ok == 0);
    CHECK(std::string(ext_sweep_item_error(sw, 1)).size() > 0);
    CHECK(ext_sweep_item_get(sw, 2, &it) == EXT_ERR_ARGUMENT);
    ext_sweep_free(sw);
    ext_config_free(cfg);
  }

  TEST_CASE("PI comparison needs gains") {
    ext_config* cfg = quick_config(2.0);
    ext_comparison cmp;
    CHECK(ext_compare_pi(cfg, nullptr, &cmp) == EXT_ERR_CONFIG);
    REQUIRE(ext_config_set(cfg, "Kp", "-2e4") == EXT_OK);
    CHECK(ext_compare_pi(cfg, nullptr, &cmp) == EXT_OK);
    CHECK(cmp.backstepping.validity_ok == 1);
    ext_config_free(cfg);
  }
}
