#include "refugia/coefficients.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "refugia/error.hpp"

namespace refugia {

namespace {

struct ParamSlot {
  std::string_view key;
  double ModelParams::*member;
  bool allow_zero;
};

constexpr std::array<ParamSlot, 15> kSlots{{
    {"beta_VH", &ModelParams::beta_vh, false},
    {"beta_HV", &ModelParams::beta_hv, false},
    {"alpha", &ModelParams::alpha, true},
    {"d_V_const", &ModelParams::d_v, false},
    {"s_V", &ModelParams::s_v, false},
    {"h", &ModelParams::h, false},
    {"gamma", &ModelParams::gamma, false},
    {"s_P", &ModelParams::s_p, false},
    {"sigma_V", &ModelParams::sigma_v, false},
    {"sigma_P", &ModelParams::sigma_p, false},
    {"rV_field", &ModelParams::rv_field, false},
    {"rV_refuge", &ModelParams::rv_refuge, false},
    {"rP_field", &ModelParams::rp_field, false},
    {"rP_refuge", &ModelParams::rp_refuge, false},
    {"H_field", &ModelParams::h_field, false},
}};

const ParamSlot& find_slot(std::string_view key) {
  for (const ParamSlot& s : kSlots) {
    if (s.key == key) return s;
  }
  throw ConfigError("unknown parameter '" + std::string(key) + "'");
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

void ModelParams::validate() const {
  for (const ParamSlot& s : kSlots) {
    const double v = this->*s.member;
    if (!std::isfinite(v)) {
      throw ConfigError("parameter " + std::string(s.key) + " is not finite");
    }
    if (s.allow_zero ? v < 0.0 : v <= 0.0) {
      throw ConfigError("parameter " + std::string(s.key) + " must be " +
                        (s.allow_zero ? "nonnegative" : "positive"));
    }
  }
}

const std::vector<std::string_view>& param_keys() {
  static const std::vector<std::string_view> keys = [] {
    std::vector<std::string_view> k;
    for (const ParamSlot& s : kSlots) k.push_back(s.key);
    return k;
  }();
  return keys;
}

double get_param(const ModelParams& p, std::string_view key) {
  return p.*find_slot(key).member;
}

void set_param(ModelParams& p, std::string_view key, double value) {
  p.*find_slot(key).member = value;
}

ModelParams parse_params(std::istream& in) {
  ModelParams p;
  std::array<bool, kSlots.size()> seen{};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("parameter line " + std::to_string(line_no) +
                        ": expected 'name = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string text = trim(line.substr(eq + 1));
    std::size_t idx = 0;
    for (; idx < kSlots.size() && kSlots[idx].key != key; ++idx) {
    }
    if (idx == kSlots.size()) {
      throw ConfigError("parameter line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
    if (seen[idx]) {
      throw ConfigError("parameter '" + key + "' given twice");
    }
    double value = 0.0;
    std::istringstream vs(text);
    std::string rest;
    if (!(vs >> value) || (vs >> rest)) {
      throw ConfigError("parameter line " + std::to_string(line_no) +
                        ": bad number '" + text + "'");
    }
    p.*kSlots[idx].member = value;
    seen[idx] = true;
  }
  for (std::size_t i = 0; i < kSlots.size(); ++i) {
    if (!seen[i]) {
      throw ConfigError("parameter '" + std::string(kSlots[i].key) +
                        "' is missing");
    }
  }
  p.validate();
  return p;
}

ModelParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open parameter file '" + path + "'");
  return parse_params(in);
}

void write_params(std::ostream& out, const ModelParams& p) {
  const auto old_precision = out.precision(17);
  for (const ParamSlot& s : kSlots) {
    out << s.key << " = " << p.*s.member << '\n';
  }
  out.precision(old_precision);
}

std::uint64_t params_hash(const ModelParams& p) {
  std::ostringstream text;
  write_params(text, p);
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : text.str()) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Extinction:
      return "Extinction";
    case Regime::Persistence:
      return "Persistence";
    case Regime::Marginal:
      return "Marginal";
  }
  return "Unknown";
}

CoefficientFields assemble_fields(const ModelParams& params,
                                  const RefugeMask& mask) {
  params.validate();
  if (mask.values.size() != mask.grid.size()) {
    throw InvalidArgument("refuge mask does not match its grid");
  }
  const std::size_t n = mask.grid.size();
  CoefficientFields f{mask, Field(n), Field(n), Field(n), Field(n),
                      Field(n, params.d_v)};
  for (std::size_t c = 0; c < n; ++c) {
    const double r = mask.values[c];
    if (!(r >= 0.0 && r <= 1.0)) {
      throw InvalidArgument("refuge density outside [0, 1]");
    }
    f.r_v[c] = params.rv_field + params.rv_refuge * r;
    f.r_p[c] = params.rp_field + params.rp_refuge * r;
    f.host[c] = params.h_field * (1.0 - r);
    f.b_v[c] = f.r_v[c] + f.d_v[c];
    if (!(f.r_p[c] > 0.0)) {
      throw InvalidArgument("assembled predator growth rate is not positive");
    }
  }
  return f;
}

Field predator_equilibrium(const CoefficientFields& fields,
                           const ModelParams& params) {
  Field p(fields.r_p.size());
  for (std::size_t c = 0; c < p.size(); ++c) p[c] = fields.r_p[c] / params.s_p;
  return p;
}

}  // namespace refugia
