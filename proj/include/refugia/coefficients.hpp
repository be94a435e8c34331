#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "refugia/geometry.hpp"

namespace refugia {

/// Model constants. Rates are per day, lengths in meters, densities per m^2.
struct ModelParams {
  double beta_vh = 0.0;    // vectors -> hosts transmission, 1/(density day)
  double beta_hv = 0.0;    // hosts -> vectors transmission, 1/(density day)
  double alpha = 0.0;      // vector recovery, 1/day
  double d_v = 0.0;        // vector death, 1/day
  double s_v = 0.0;        // vector saturation, 1/(density day)
  double h = 0.0;          // predation rate, 1/(density day)
  double gamma = 0.0;      // predation efficiency
  double s_p = 0.0;        // predator saturation, 1/(density day)
  double sigma_v = 0.0;    // vector diffusivity, m^2/day
  double sigma_p = 0.0;    // predator motility, m^2/day
  double rv_field = 0.0;   // vector Malthusian rate in the field
  double rv_refuge = 0.0;  // vector rate increment inside refuges
  double rp_field = 0.0;   // predator Malthusian rate in the field
  double rp_refuge = 0.0;  // predator rate increment inside refuges
  double h_field = 0.0;    // host density in the field, beets/m^2

  /// Throws ConfigError on a non-finite or out-of-range value.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Config-file names, in canonical order.
const std::vector<std::string_view>& param_keys();
double get_param(const ModelParams& p, std::string_view key);
void set_param(ModelParams& p, std::string_view key, double value);

// Flat "name = value" file; '#' starts a comment; unknown keys are rejected.
ModelParams parse_params(std::istream& in);
ModelParams load_params(const std::string& path);
void write_params(std::ostream& out, const ModelParams& p);

/// FNV-1a over the canonical text form; stable within one build.
std::uint64_t params_hash(const ModelParams& p);

enum class Regime { Extinction, Persistence, Marginal };
const char* regime_name(Regime r);

/// Calibration presets (not measured field data). Each preset's regime is
/// checked on a reference layout before it is returned.
ModelParams preset_params(std::string_view name);
std::optional<ModelParams> unchecked_preset(std::string_view name);
std::vector<std::string_view> preset_names();

/// Heterogeneous coefficients assembled from a refuge mask.
struct CoefficientFields {
  RefugeMask mask;
  Field r_v;
  Field r_p;
  Field host;
  Field b_v;
  Field d_v;

  const Grid& grid() const { return mask.grid; }
};

CoefficientFields assemble_fields(const ModelParams& params,
                                  const RefugeMask& mask);

/// Predator-only equilibrium r_P / s_P.
Field predator_equilibrium(const CoefficientFields& fields,
                           const ModelParams& params);

}  // namespace refugia
