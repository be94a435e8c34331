#include "config.hpp"

#include <cmath>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace refugia_cli {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw CliError(kConfigError, msg); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !std::isfinite(out)) {
    config_error("'" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    config_error("'" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

std::string one_of(const std::string& key, const std::string& v,
                   std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (v == a) return v;
  }
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  config_error("'" + key + "' must be one of {" + list + "}, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  if (out.empty()) config_error("'" + key + "' needs at least one value");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"params", [](RunConfig& c, auto&, auto& v) { c.params_path = v; }},
      {"preset", [](RunConfig& c, auto&, auto& v) { c.preset = v; }},
      {"nx", [](RunConfig& c, auto& k, auto& v) { c.nx = to_int(k, v); }},
      {"ny", [](RunConfig& c, auto& k, auto& v) { c.ny = to_int(k, v); }},
      {"lx", [](RunConfig& c, auto& k, auto& v) { c.lx = to_double(k, v); }},
      {"ly", [](RunConfig& c, auto& k, auto& v) { c.ly = to_double(k, v); }},
      {"refuge", [](RunConfig& c, auto& k, auto& v) {
         c.refuge = one_of(k, v, {"frequency", "uniform", "none"});
       }},
      {"refuge_n", [](RunConfig& c, auto& k, auto& v) { c.refuge_n = to_int(k, v); }},
      {"refuge_area", [](RunConfig& c, auto& k, auto& v) { c.refuge_area = to_double(k, v); }},
      {"refuge_density",
       [](RunConfig& c, auto& k, auto& v) { c.refuge_density = to_double(k, v); }},
      {"ic", [](RunConfig& c, auto& k, auto& v) {
         c.ic = one_of(k, v, {"none", "patches", "centered", "uniform", "constant"});
       }},
      {"ic_layout", [](RunConfig& c, auto&, auto& v) { c.ic_layout = v; }},
      {"ic_vi", [](RunConfig& c, auto& k, auto& v) { c.ic_vi = to_double(k, v); }},
      {"ic_vs", [](RunConfig& c, auto& k, auto& v) { c.ic_vs = to_double(k, v); }},
      {"ic_p0", [](RunConfig& c, auto& k, auto& v) { c.ic_p0 = to_double(k, v); }},
      {"T", [](RunConfig& c, auto& k, auto& v) { c.horizon = to_double(k, v); }},
      {"steps", [](RunConfig& c, auto& k, auto& v) { c.steps = to_int(k, v); }},
      {"dt", [](RunConfig& c, auto& k, auto& v) { c.dt = to_double(k, v); }},
      {"snapshot_stride",
       [](RunConfig& c, auto& k, auto& v) { c.snapshot_stride = to_int(k, v); }},
      {"scheme", [](RunConfig& c, auto& k, auto& v) {
         c.scheme = one_of(k, v, {"semi", "explicit"});
       }},
      {"face_average", [](RunConfig& c, auto& k, auto& v) {
         c.face_average = one_of(k, v, {"arithmetic", "harmonic"});
       }},
      {"monitors", [](RunConfig& c, auto& k, auto& v) {
         c.monitors = one_of(k, v, {"warn", "abort"});
       }},
      {"sweep_values", [](RunConfig& c, auto& k, auto& v) { c.sweep_values = to_list(k, v); }},
      {"threads", [](RunConfig& c, auto& k, auto& v) { c.threads = to_int(k, v); }},
      {"eps", [](RunConfig& c, auto& k, auto& v) { c.eps = to_double(k, v); }},
      {"slack", [](RunConfig& c, auto& k, auto& v) { c.slack = to_double(k, v); }},
      {"persist_tol", [](RunConfig& c, auto& k, auto& v) { c.persist_tol = to_double(k, v); }},
      {"burn_in", [](RunConfig& c, auto& k, auto& v) { c.burn_in = to_double(k, v); }},
      {"gap_threshold",
       [](RunConfig& c, auto& k, auto& v) { c.gap_threshold = to_double(k, v); }},
  };
  return table;
}

bool is_param_key(const std::string& name) {
  for (size_t k = 0; k < rf_param_count(); ++k) {
    if (name == rf_param_key(k)) return true;
  }
  return false;
}

std::string resolve_path(const RunConfig& cfg, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  if (path.is_absolute()) return p;
  return fs::absolute(fs::path(cfg.base_dir) / path).lexically_normal().string();
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  const std::string v = trim(value);
  if (k.rfind("param.", 0) == 0) {
    const std::string name = k.substr(6);
    if (!is_param_key(name)) config_error("unknown parameter '" + name + "'");
    cfg.param_values[name] = to_double(k, v);
    return;
  }
  const auto it = setters().find(k);
  if (it == setters().end()) config_error("unknown config key '" + k + "'");
  it->second(cfg, k, v);
}

RunConfig parse_config_text(const std::string& text, const std::string& base_dir) {
  RunConfig cfg;
  cfg.base_dir = base_dir;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      config_error("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

RunConfig parse_config_json(const nlohmann::json& j, const std::string& base_dir) {
  if (!j.is_object()) config_error("JSON config must be an object");
  RunConfig cfg;
  cfg.base_dir = base_dir;
  for (const auto& [key, value] : j.items()) {
    if (key == "command" || key == "params_source") continue;  // informational
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_number()) {
      text = value.is_number_integer() ? std::to_string(value.get<long long>())
                                       : format_double(value.get<double>());
    } else if (value.is_array()) {
      for (const auto& item : value) {
        if (!item.is_number()) config_error("'" + key + "' must hold numbers");
        text += (text.empty() ? "" : ",") + format_double(item.get<double>());
      }
    } else {
      config_error("unsupported JSON value for '" + key + "'");
    }
    apply_setting(cfg, key, text);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string base = fs::path(path).parent_path().string();
  const std::string dir = base.empty() ? "." : base;
  if (fs::path(path).extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::exception& e) {
      config_error("invalid JSON in '" + path + "': " + e.what());
    }
    return parse_config_json(j, dir);
  }
  return parse_config_text(ss.str(), dir);
}

ParamsPtr resolve(RunConfig& cfg) {
  if (!cfg.params_path.empty() && !cfg.preset.empty()) {
    config_error("give either 'params' or 'preset', not both");
  }
  rf_params* raw = nullptr;
  if (!cfg.params_path.empty()) {
    cfg.params_path = resolve_path(cfg, cfg.params_path);
    check(rf_params_load(cfg.params_path.c_str(), &raw), "loading parameters");
  } else if (!cfg.preset.empty()) {
    check(rf_params_preset(cfg.preset.c_str(), &raw), "loading preset");
  } else {
    if (cfg.param_values.size() != rf_param_count()) {
      config_error("no 'params' file or 'preset' given and the inline param.* set is incomplete");
    }
    std::string text;
    for (const auto& [k, v] : cfg.param_values) text += k + " = " + format_double(v) + "\n";
    check(rf_params_parse(text.c_str(), &raw), "inline parameters");
  }
  ParamsPtr params(raw);
  for (const auto& [k, v] : cfg.param_values) {
    check(rf_params_set(params.get(), k.c_str(), v), "parameter override");
  }
  check(rf_params_validate(params.get()), "parameters");

  check(rf_grid_check(grid_of(cfg)), "grid");
  if (cfg.dt > 0.0) {
    cfg.steps = static_cast<int>(std::ceil(cfg.horizon / cfg.dt - 1e-9));
    cfg.dt = 0.0;
  }
  if (cfg.steps < 1 || !(cfg.horizon > 0.0)) config_error("need T > 0 and steps >= 1");
  if (cfg.snapshot_stride < 0) config_error("snapshot_stride must be >= 0");
  if (cfg.burn_in < 0.0) cfg.burn_in = 0.5 * cfg.horizon;
  if (cfg.ic == "patches") {
    if (cfg.ic_layout.empty()) config_error("ic = patches needs 'ic_layout'");
    cfg.ic_layout = resolve_path(cfg, cfg.ic_layout);
  } else {
    cfg.ic_layout.clear();
  }
  return params;
}

nlohmann::json to_json(const RunConfig& cfg, const rf_params* params) {
  nlohmann::json j;
  j["params_source"] = !cfg.params_path.empty() ? cfg.params_path
                       : !cfg.preset.empty()    ? "preset:" + cfg.preset
                                                : std::string("inline");
  for (size_t k = 0; k < rf_param_count(); ++k) {
    double v = 0.0;
    check(rf_params_get(params, rf_param_key(k), &v), "parameter echo");
    j[std::string("param.") + rf_param_key(k)] = v;
  }
  j["nx"] = cfg.nx;
  j["ny"] = cfg.ny;
  j["lx"] = cfg.lx;
  j["ly"] = cfg.ly;
  j["refuge"] = cfg.refuge;
  j["refuge_n"] = cfg.refuge_n;
  j["refuge_area"] = cfg.refuge_area;
  j["refuge_density"] = cfg.refuge_density;
  j["ic"] = cfg.ic;
  if (!cfg.ic_layout.empty()) j["ic_layout"] = cfg.ic_layout;
  j["ic_vi"] = cfg.ic_vi;
  j["ic_vs"] = cfg.ic_vs;
  j["ic_p0"] = cfg.ic_p0;
  j["T"] = cfg.horizon;
  j["steps"] = cfg.steps;
  j["snapshot_stride"] = cfg.snapshot_stride;
  j["scheme"] = cfg.scheme;
  j["face_average"] = cfg.face_average;
  j["monitors"] = cfg.monitors;
  if (!cfg.sweep_values.empty()) j["sweep_values"] = cfg.sweep_values;
  j["threads"] = cfg.threads;
  j["eps"] = cfg.eps;
  j["slack"] = cfg.slack;
  j["persist_tol"] = cfg.persist_tol;
  j["burn_in"] = cfg.burn_in;
  j["gap_threshold"] = cfg.gap_threshold;
  return j;
}

rf_grid grid_of(const RunConfig& cfg) { return rf_grid{cfg.nx, cfg.ny, cfg.lx, cfg.ly}; }

rf_initial initial_of(const RunConfig& cfg, const rf_layout* layout) {
  rf_initial ic;
  rf_initial_defaults(&ic);
  if (cfg.ic == "patches") ic.kind = RF_IC_PATCHES;
  else if (cfg.ic == "centered") ic.kind = RF_IC_CENTERED;
  else if (cfg.ic == "uniform") ic.kind = RF_IC_UNIFORM;
  else if (cfg.ic == "constant") ic.kind = RF_IC_CONSTANT;
  else ic.kind = RF_IC_NONE;
  ic.layout = layout;
  ic.refuge_area = cfg.refuge_area;
  ic.vi_scale = cfg.ic_vi;
  ic.vs_scale = cfg.ic_vs;
  ic.p0_scale = cfg.ic_p0;
  return ic;
}

rf_sim_options options_of(const RunConfig& cfg) {
  rf_sim_options o;
  rf_sim_options_defaults(&o);
  o.horizon = cfg.horizon;
  o.steps = cfg.steps;
  o.snapshot_stride = cfg.snapshot_stride;
  o.scheme = cfg.scheme == "explicit" ? RF_SCHEME_EXPLICIT : RF_SCHEME_SEMI;
  o.face_average = cfg.face_average == "harmonic" ? RF_FACE_HARMONIC : RF_FACE_ARITHMETIC;
  o.monitor_mode = cfg.monitors == "abort" ? RF_MONITOR_ABORT : RF_MONITOR_WARN;
  return o;
}

LayoutPtr load_layout(const RunConfig& cfg) {
  if (cfg.ic != "patches") return nullptr;
  rf_layout* raw = nullptr;
  check(rf_layout_load(cfg.ic_layout.c_str(), &raw), "loading patch layout");
  LayoutPtr layout(raw);
  check(rf_layout_validate(layout.get(), grid_of(cfg)), "patch layout");
  return layout;
}

MaskPtr build_mask(const RunConfig& cfg) {
  rf_mask* raw = nullptr;
  const rf_grid g = grid_of(cfg);
  if (cfg.refuge == "frequency") {
    check(rf_mask_frequency(g, cfg.refuge_n, cfg.refuge_area, &raw), "refuge mask");
  } else if (cfg.refuge == "uniform") {
    check(rf_mask_uniform(g, cfg.refuge_density, &raw), "refuge mask");
  } else {
    check(rf_mask_uniform(g, 0.0, &raw), "refuge mask");
  }
  return MaskPtr(raw);
}

}  // namespace refugia_cli
