#pragma once

#include <map>
#include <string>
#include <vector>

#include "handles.hpp"
#include "json.hpp"

namespace refugia_cli {

// Everything a command needs, with every default filled in. Loaded from a
// `key = value` file or from a JSON sidecar written by an earlier run.
struct RunConfig {
  // Parameters: a file, a preset name, or a complete inline set.
  std::string params_path;
  std::string preset;
  std::map<std::string, double> param_values;  // "param.<key>" entries

  int nx = 80;
  int ny = 80;
  double lx = 300.0;
  double ly = 300.0;

  std::string refuge = "frequency";  // frequency | uniform | none
  int refuge_n = 4;
  double refuge_area = 3600.0;
  double refuge_density = 0.0;  // uniform refuge

  std::string ic = "uniform";  // none | patches | centered | uniform | constant
  std::string ic_layout;       // patches
  double ic_vi = 0.01;
  double ic_vs = 0.09;
  double ic_p0 = 1.0;

  double horizon = 365.0 / 4.0;
  int steps = 4000;
  double dt = 0.0;  // > 0 replaces steps with ceil(horizon / dt)
  int snapshot_stride = 0;
  std::string scheme = "semi";         // semi | explicit
  std::string face_average = "arithmetic";  // arithmetic | harmonic
  std::string monitors = "warn";       // warn | abort

  std::vector<double> sweep_values;
  int threads = 0;

  double eps = 0.0;  // <= 0: half of lambda1(L_Vs) / h
  double slack = 0.05;
  double persist_tol = 1e-3;
  double burn_in = -1.0;  // < 0: half the horizon
  double gap_threshold = 1e-2;

  // Directory that relative paths in the file are resolved against.
  std::string base_dir = ".";
};

RunConfig parse_config_text(const std::string& text, const std::string& base_dir);
RunConfig parse_config_json(const nlohmann::json& j, const std::string& base_dir);
// Dispatches on the extension: .json is a sidecar, anything else key-value.
RunConfig load_config(const std::string& path);

// Applies one `key=value` override with the same rules as the file format.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// Fixes every default that depends on others, loads the parameter set and
// checks the combination. The returned handle is the resolved parameter set.
ParamsPtr resolve(RunConfig& cfg);

// Flat JSON echo of a resolved config. Parameters are written inline so the
// sidecar stands alone.
nlohmann::json to_json(const RunConfig& cfg, const rf_params* params);

rf_grid grid_of(const RunConfig& cfg);
rf_initial initial_of(const RunConfig& cfg, const rf_layout* layout);
rf_sim_options options_of(const RunConfig& cfg);
LayoutPtr load_layout(const RunConfig& cfg);
MaskPtr build_mask(const RunConfig& cfg);

}  // namespace refugia_cli
