#include "extruder/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "extruder/errors.hpp"
#include "extruder/mesh.hpp"

namespace extruder {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  int out = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
  return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_double(key, item));
  }
  return out;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fmt(v[i]);
  }
  return out;
}

template <class E>
E parse_enum(const std::string& key, const std::string& v,
             std::initializer_list<std::pair<const char*, E>> opts) {
  const std::string t = trim(v);
  std::string allowed;
  for (const auto& [name, val] : opts) {
    if (t == name) return val;
    allowed += allowed.empty() ? name : std::string("|") + name;
  }
  throw ConfigError("key '" + key + "': expected one of " + allowed + ", got '" + v + "'");
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class M>
Field number(M RunConfig::*member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_double(k, v);
          },
          [member](const RunConfig& c) { return fmt(c.*member); }};
}

Field material(double MaterialParams::*member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) {
            c.m.*member = parse_double(k, v);
          },
          [member](const RunConfig& c) { return fmt(c.m.*member); }};
}

Field process(double ProcessParams::*member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) {
            c.p.*member = parse_double(k, v);
          },
          [member](const RunConfig& c) { return fmt(c.p.*member); }};
}

Field step(double StepControl::*member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) {
            c.step.*member = parse_double(k, v);
          },
          [member](const RunConfig& c) { return fmt(c.step.*member); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"rho_s", material(&MaterialParams::rho_s)},
      {"rho_l", material(&MaterialParams::rho_l)},
      {"c_s", material(&MaterialParams::c_s)},
      {"c_l", material(&MaterialParams::c_l)},
      {"k_s", material(&MaterialParams::k_s)},
      {"k_l", material(&MaterialParams::k_l)},
      {"hbar_s", material(&MaterialParams::hbar_s)},
      {"hbar_l", material(&MaterialParams::hbar_l)},
      {"dH", material(&MaterialParams::dH)},
      {"T_m", material(&MaterialParams::T_m)},
      {"L", process(&ProcessParams::L)},
      {"b", process(&ProcessParams::b)},
      {"T_b", process(&ProcessParams::T_b)},
      {"q_m_star", process(&ProcessParams::q_m_star)},
      {"s_r", process(&ProcessParams::s_r)},
      {"s_0", process(&ProcessParams::s_0)},
      {"gain_c", number(&RunConfig::gain_c)},
      {"grid_n",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.grid_n = parse_int(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.grid_n); }}},
      {"abs_tol", step(&StepControl::abs_tol)},
      {"rel_tol", step(&StepControl::rel_tol)},
      {"dt_init", step(&StepControl::dt_init)},
      {"dt_min", step(&StepControl::dt_min)},
      {"dt_max", step(&StepControl::dt_max)},
      {"t_end", number(&RunConfig::t_end)},
      {"snapshot_every", number(&RunConfig::snapshot_every)},
      {"log_every", number(&RunConfig::log_every)},
      {"s_min", number(&RunConfig::s_min)},
      {"T_s0_inlet", number(&RunConfig::T_s0_inlet)},
      {"init_liquid",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.init_liquid = parse_enum<LiquidInit>(
              k, v, {{"linear", LiquidInit::linear}, {"steady", LiquidInit::steady}});
        },
        [](const RunConfig& c) {
          return std::string(c.init_liquid == LiquidInit::linear ? "linear" : "steady");
        }}},
      {"obs_offset", number(&RunConfig::obs_offset)},
      {"controller",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.controller = parse_enum<Controller>(k, v,
                                                {{"output_feedback", Controller::output_feedback},
                                                 {"full_state", Controller::full_state},
                                                 {"pi", Controller::pi},
                                                 {"open_loop", Controller::open_loop}});
        },
        [](const RunConfig& c) { return std::string(to_string(c.controller)); }}},
      {"control_update",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.control_update = parse_enum<ControlUpdate>(
              k, v,
              {{"continuous", ControlUpdate::continuous},
               {"sample_hold", ControlUpdate::sample_hold}});
        },
        [](const RunConfig& c) { return std::string(to_string(c.control_update)); }}},
      {"sdot_source",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.sdot_source = parse_enum<SdotSource>(
              k, v,
              {{"plant", SdotSource::plant}, {"finite_difference", SdotSource::finite_difference}});
        },
        [](const RunConfig& c) { return std::string(to_string(c.sdot_source)); }}},
      {"setpoint_check",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.setpoint_check = parse_enum<SetpointCheck>(
              k, v,
              {{"enforce", SetpointCheck::enforce},
               {"warn", SetpointCheck::warn},
               {"off", SetpointCheck::off}});
        },
        [](const RunConfig& c) {
          switch (c.setpoint_check) {
            case SetpointCheck::enforce: return std::string("enforce");
            case SetpointCheck::warn: return std::string("warn");
            default: return std::string("off");
          }
        }}},
      {"Kp", number(&RunConfig::Kp)},
      {"Ki", number(&RunConfig::Ki)},
      {"q_f_min", number(&RunConfig::q_f_min)},
      {"q_f_max", number(&RunConfig::q_f_max)},
      {"eps_grid", number(&RunConfig::eps_grid)},
      {"eps_sdot", number(&RunConfig::eps_sdot)},
      {"eps_s", number(&RunConfig::eps_s)},
      {"eps_Z_rel", number(&RunConfig::eps_Z_rel)},
      {"sweep_b",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.sweep_b = parse_list(k, v);
        },
        [](const RunConfig& c) { return fmt_list(c.sweep_b); }}},
      {"sweep_c",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.sweep_c = parse_list(k, v);
        },
        [](const RunConfig& c) { return fmt_list(c.sweep_c); }}},
      {"sweep_mode",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.sweep_cross = parse_enum<bool>(k, v, {{"paired", false}, {"cross", true}});
        },
        [](const RunConfig& c) { return std::string(c.sweep_cross ? "cross" : "paired"); }}},
      {"output_dir",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          const std::string t = trim(v);
          if (t.empty()) throw ConfigError("key '" + k + "': empty path");
          c.output_dir = t;
        },
        [](const RunConfig& c) { return c.output_dir; }}},
  };
  return table;
}

}  // namespace

const char* to_string(Controller c) {
  switch (c) {
    case Controller::output_feedback: return "output_feedback";
    case Controller::full_state: return "full_state";
    case Controller::pi: return "pi";
    default: return "open_loop";
  }
}

const char* to_string(SdotSource s) {
  return s == SdotSource::plant ? "plant" : "finite_difference";
}

const char* to_string(ControlUpdate u) {
  return u == ControlUpdate::continuous ? "continuous" : "sample_hold";
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, field] : fields()) out.emplace_back(key, field.get(cfg));
  return out;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  for (const auto& [name, field] : fields()) {
    if (name == k) {
      field.set(cfg, k, value);
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + k + "'");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const RunConfig& cfg) {
  validate(cfg.m);
  validate(cfg.p);
  cfg.step.validate();
  if (cfg.grid_n < ImmobilizedGrid::min_nodes) {
    throw ConfigError("grid_n must be at least " + std::to_string(ImmobilizedGrid::min_nodes));
  }
  if (!(cfg.t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (!(cfg.snapshot_every >= 0.0)) throw ConfigError("snapshot_every must be >= 0");
  if (!(cfg.log_every >= 0.0)) throw ConfigError("log_every must be >= 0");
  if (!(cfg.eps_grid >= 0.0 && cfg.eps_sdot >= 0.0 && cfg.eps_s >= 0.0 &&
        cfg.eps_Z_rel >= 0.0)) {
    throw ConfigError("eps_grid, eps_sdot, eps_s and eps_Z_rel must be >= 0");
  }
  if (!(cfg.obs_offset >= 0.0)) throw ConfigError("obs_offset must be >= 0");
  if (!(cfg.gain_c > 0.0)) throw ConfigError("gain_c must be positive");
  if (!(cfg.q_f_min < cfg.q_f_max)) throw ConfigError("q_f_min must be below q_f_max");
  if (cfg.T_s0_inlet > cfg.m.T_m) {
    throw ConfigError("T_s0_inlet must not exceed T_m (initial solid would be invalid)");
  }
  if (cfg.resolved_s_min() >= cfg.p.s_0) throw ConfigError("s_min must be below s_0");
}

std::string render_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : config_entries(cfg)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace extruder
