#include <sstream>

#include "refugia/coefficients.hpp"
#include "refugia/error.hpp"
#include "refugia/spectral.hpp"

namespace refugia {

namespace {

// Both presets share every constant except the predation rate h, which moves
// lambda1(L_Vs) across zero on the reference layout.
ModelParams base_preset() {
  ModelParams p;
  p.beta_vh = 0.01;
  p.beta_hv = 0.01;
  p.alpha = 0.05;
  p.d_v = 0.1;
  p.s_v = 0.003;
  p.h = 0.04;
  p.gamma = 0.01;
  p.s_p = 0.01;
  p.sigma_v = 300.0;
  p.sigma_p = 300.0;
  p.rv_field = 0.1;
  p.rv_refuge = 0.05;
  p.rp_field = 0.05;
  p.rp_refuge = 0.4;
  // 1016470 beets on the 300 m field minus 3600 m^2 of refuges.
  p.h_field = 1016470.0 / 86400.0;
  return p;
}

struct PresetInfo {
  std::string_view name;
  Regime expected;
  ModelParams (*make)();
};

ModelParams extinction_preset() { return base_preset(); }

ModelParams persistence_preset() {
  ModelParams p = base_preset();
  p.h = 0.01;
  return p;
}

constexpr PresetInfo kPresets[] = {
    {"extinction", Regime::Extinction, &extinction_preset},
    {"persistence", Regime::Persistence, &persistence_preset},
};

// Reference layout for the load-time regime check: 300 m square, 40x40
// cells, frequency-4 refuges covering 1/25 of the field.
Regime reference_regime(const ModelParams& p) {
  const Grid grid = build_grid(40, 40, 300.0, 300.0);
  const RefugeMask mask = refuge_frequency_mask(grid, 4, 3600.0);
  return regime_classify(assemble_fields(p, mask), p);
}

}  // namespace

std::vector<std::string_view> preset_names() {
  std::vector<std::string_view> names;
  for (const PresetInfo& info : kPresets) names.push_back(info.name);
  return names;
}

std::optional<ModelParams> unchecked_preset(std::string_view name) {
  for (const PresetInfo& info : kPresets) {
    if (info.name == name) return info.make();
  }
  return std::nullopt;
}

ModelParams preset_params(std::string_view name) {
  for (const PresetInfo& info : kPresets) {
    if (info.name != name) continue;
    ModelParams p = info.make();
    p.validate();
    const Regime got = reference_regime(p);
    if (got != info.expected) {
      std::ostringstream msg;
      msg << "preset '" << name << "' classifies as " << regime_name(got)
          << " on the reference layout, expected "
          << regime_name(info.expected);
      throw ConfigError(msg.str());
    }
    return p;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

}  // namespace refugia
