#include "refugia/refugia.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "refugia/analysis.hpp"
#include "refugia/control.hpp"
#include "refugia/error.hpp"
#include "refugia/spectral.hpp"

struct rf_params {
  refugia::ModelParams value;
};

struct rf_mask {
  refugia::RefugeMask value;
};

struct rf_layout {
  refugia::PatchSpec value;
};

struct rf_fields {
  refugia::CoefficientFields value;
};

struct rf_run {
  refugia::Scenario scenario;
  refugia::RunSummary summary;
};

namespace {

using namespace refugia;

thread_local std::string last_error;

rf_status fail(rf_status code, const std::string& msg) {
  last_error = msg;
  return code;
}

rf_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return RF_ERR_ARGUMENT;
    case ErrorKind::Config: return RF_ERR_CONFIG;
    case ErrorKind::Solver: return RF_ERR_SOLVER;
    case ErrorKind::Monitor: return RF_ERR_MONITOR;
    case ErrorKind::Io: return RF_ERR_IO;
  }
  return RF_ERR_INTERNAL;
}

template <class F>
rf_status guarded(F&& body) {
  try {
    body();
    return RF_OK;
  } catch (const Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(RF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RF_ERR_INTERNAL, e.what());
  }
}

template <class T>
void require(const T* ptr, const char* what) {
  if (ptr == nullptr) throw InvalidArgument(std::string(what) + " is null");
}

Grid to_grid(rf_grid g) { return build_grid(g.nx, g.ny, g.lx, g.ly); }

rf_grid from_grid(const Grid& g) { return rf_grid{g.nx, g.ny, g.lx, g.ly}; }

void copy_out(std::span<const double> src, double* buf, size_t len) {
  require(buf, "output buffer");
  if (len < src.size()) {
    throw InvalidArgument("output buffer holds " + std::to_string(len) +
                          " values, need " + std::to_string(src.size()));
  }
  std::copy(src.begin(), src.end(), buf);
}

template <std::size_t N>
void copy_message(char (&dst)[N], const std::string& msg) {
  const std::size_t n = std::min(msg.size(), N - 1);
  std::memcpy(dst, msg.data(), n);
  dst[n] = '\0';
}

FaceAverage to_average(rf_face_average a) {
  switch (a) {
    case RF_FACE_ARITHMETIC: return FaceAverage::Arithmetic;
    case RF_FACE_HARMONIC: return FaceAverage::Harmonic;
  }
  throw InvalidArgument("unknown face average");
}

InitialCondition to_initial(const rf_initial& ic) {
  InitialCondition out;
  switch (ic.kind) {
    case RF_IC_NONE: out.kind = InitialCondition::Kind::None; break;
    case RF_IC_PATCHES:
      out.kind = InitialCondition::Kind::Patches;
      require(ic.layout, "patch layout");
      out.layout = ic.layout->value;
      break;
    case RF_IC_CENTERED: out.kind = InitialCondition::Kind::CenteredPatch; break;
    case RF_IC_UNIFORM: out.kind = InitialCondition::Kind::Uniform; break;
    case RF_IC_CONSTANT: out.kind = InitialCondition::Kind::Constant; break;
    default: throw InvalidArgument("unknown initial-condition kind");
  }
  out.refuge_area = ic.refuge_area;
  out.vi_scale = ic.vi_scale;
  out.vs_scale = ic.vs_scale;
  out.p0_scale = ic.p0_scale;
  return out;
}

MonitorConfig to_monitors(const rf_sim_options& o) {
  MonitorConfig m;
  switch (o.monitor_mode) {
    case RF_MONITOR_WARN: m.mode = MonitorMode::Warn; break;
    case RF_MONITOR_ABORT: m.mode = MonitorMode::Abort; break;
    default: throw InvalidArgument("unknown monitor mode");
  }
  m.clamp_tol = o.clamp_tol;
  m.bound_tol = o.bound_tol;
  return m;
}

Scheme to_scheme(rf_scheme s) {
  switch (s) {
    case RF_SCHEME_SEMI: return Scheme::SemiImplicit;
    case RF_SCHEME_EXPLICIT: return Scheme::Explicit;
  }
  throw InvalidArgument("unknown scheme");
}

std::span<const double> field_of(const CoefficientFields& f, rf_field_kind kind) {
  switch (kind) {
    case RF_FIELD_MASK: return f.mask.values;
    case RF_FIELD_RV: return f.r_v;
    case RF_FIELD_RP: return f.r_p;
    case RF_FIELD_HOST: return f.host;
    case RF_FIELD_BV: return f.b_v;
    case RF_FIELD_DV: return f.d_v;
    default: throw InvalidArgument("not a coefficient field kind");
  }
}

std::span<const double> field_of(const State& s, rf_field_kind kind) {
  switch (kind) {
    case RF_FIELD_INFECTED: return s.infected;
    case RF_FIELD_VI: return s.vi;
    case RF_FIELD_VS: return s.vs;
    case RF_FIELD_PRED: return s.pred;
    case RF_FIELD_CUM_VI: return s.cum_vi;
    default: throw InvalidArgument("not a state field kind");
  }
}

const State& snapshot_at(const rf_run& r, size_t index) {
  const auto& snaps = r.summary.snapshots;
  if (!snaps.empty()) {
    if (index >= snaps.size()) throw InvalidArgument("snapshot index out of range");
    return snaps[index];
  }
  if (index == 0) return r.summary.initial;
  if (index == 1) return r.summary.final_state;
  throw InvalidArgument("snapshot index out of range");
}

template <class T>
rf_status make_handle(T** out, auto&& build) {
  return guarded([&] {
    require(out, "output handle");
    *out = nullptr;
    *out = new T{build()};
  });
}

}  // namespace

extern "C" {

const char* rf_last_error(void) { return last_error.c_str(); }

const char* rf_version(void) { return "1.0.0"; }

rf_status rf_params_preset(const char* name, rf_params** out) {
  return make_handle(out, [&] {
    require(name, "preset name");
    return preset_params(name);
  });
}

rf_status rf_params_load(const char* path, rf_params** out) {
  return make_handle(out, [&] {
    require(path, "path");
    return load_params(path);
  });
}

rf_status rf_params_parse(const char* text, rf_params** out) {
  return make_handle(out, [&] {
    require(text, "text");
    std::istringstream in(text);
    return parse_params(in);
  });
}

rf_status rf_params_clone(const rf_params* p, rf_params** out) {
  return make_handle(out, [&] {
    require(p, "params");
    return p->value;
  });
}

void rf_params_free(rf_params* p) { delete p; }

rf_status rf_params_set(rf_params* p, const char* key, double value) {
  return guarded([&] {
    require(p, "params");
    require(key, "key");
    set_param(p->value, key, value);
  });
}

rf_status rf_params_get(const rf_params* p, const char* key, double* value) {
  return guarded([&] {
    require(p, "params");
    require(key, "key");
    require(value, "value");
    *value = get_param(p->value, key);
  });
}

rf_status rf_params_validate(const rf_params* p) {
  return guarded([&] {
    require(p, "params");
    p->value.validate();
  });
}

rf_status rf_params_hash(const rf_params* p, uint64_t* hash) {
  return guarded([&] {
    require(p, "params");
    require(hash, "hash");
    *hash = params_hash(p->value);
  });
}

rf_status rf_params_dump(const rf_params* p, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    require(p, "params");
    std::ostringstream os;
    write_params(os, p->value);
    const std::string text = os.str();
    if (needed != nullptr) *needed = text.size() + 1;
    if (buf == nullptr) return;
    if (cap < text.size() + 1) throw InvalidArgument("buffer too small for parameter dump");
    std::memcpy(buf, text.c_str(), text.size() + 1);
  });
}

size_t rf_param_count(void) { return param_keys().size(); }

const char* rf_param_key(size_t index) {
  const auto& keys = param_keys();
  // Keys are views onto string literals, so data() is NUL terminated.
  return index < keys.size() ? keys[index].data() : nullptr;
}

size_t rf_preset_count(void) { return preset_names().size(); }

const char* rf_preset_name(size_t index) {
  static const std::vector<std::string_view> names = preset_names();
  return index < names.size() ? names[index].data() : nullptr;
}

rf_status rf_grid_check(rf_grid grid) {
  return guarded([&] { (void)to_grid(grid); });
}

rf_status rf_mask_frequency(rf_grid grid, int n, double area, rf_mask** out) {
  return make_handle(out, [&] { return refuge_frequency_mask(to_grid(grid), n, area); });
}

rf_status rf_mask_uniform(rf_grid grid, double r, rf_mask** out) {
  return make_handle(out, [&] { return refuge_uniform_mask(to_grid(grid), r); });
}

rf_status rf_mask_from_values(rf_grid grid, const double* values, size_t len,
                              rf_mask** out) {
  return make_handle(out, [&] {
    require(values, "values");
    const Grid g = to_grid(grid);
    if (len != g.size()) throw InvalidArgument("mask values do not match the grid");
    RefugeMask m{g, Field(values, values + len)};
    for (double v : m.values) {
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("mask values must lie in [0, 1]");
    }
    return m;
  });
}

void rf_mask_free(rf_mask* m) { delete m; }

rf_status rf_mask_area(const rf_mask* m, double* area) {
  return guarded([&] {
    require(m, "mask");
    require(area, "area");
    *area = mask_area(m->value);
  });
}

rf_status rf_mask_values(const rf_mask* m, double* buf, size_t len) {
  return guarded([&] {
    require(m, "mask");
    copy_out(m->value.values, buf, len);
  });
}

rf_status rf_layout_load(const char* path, rf_layout** out) {
  return make_handle(out, [&] {
    require(path, "path");
    return load_patch_spec(path);
  });
}

rf_status rf_layout_parse(const char* text, rf_layout** out) {
  return make_handle(out, [&] {
    require(text, "text");
    std::istringstream in(text);
    return parse_patch_spec(in);
  });
}

void rf_layout_free(rf_layout* l) { delete l; }

size_t rf_layout_count(const rf_layout* l) {
  return l == nullptr ? 0 : l->value.rectangles.size();
}

rf_status rf_layout_validate(const rf_layout* l, rf_grid grid) {
  return guarded([&] {
    require(l, "layout");
    validate_patch_spec(to_grid(grid), l->value);
  });
}

rf_status rf_layout_field(const rf_layout* l, rf_grid grid, double* buf, size_t len) {
  return guarded([&] {
    require(l, "layout");
    copy_out(patches_field(to_grid(grid), l->value), buf, len);
  });
}

rf_status rf_fields_assemble(const rf_params* p, const rf_mask* m, rf_fields** out) {
  return make_handle(out, [&] {
    require(p, "params");
    require(m, "mask");
    return assemble_fields(p->value, m->value);
  });
}

void rf_fields_free(rf_fields* f) { delete f; }

rf_status rf_fields_grid(const rf_fields* f, rf_grid* grid) {
  return guarded([&] {
    require(f, "fields");
    require(grid, "grid");
    *grid = from_grid(f->value.grid());
  });
}

rf_status rf_fields_get(const rf_fields* f, rf_field_kind kind, double* buf, size_t len) {
  return guarded([&] {
    require(f, "fields");
    copy_out(field_of(f->value, kind), buf, len);
  });
}

rf_status rf_fields_total_hosts(const rf_fields* f, double* total) {
  return guarded([&] {
    require(f, "fields");
    require(total, "total");
    *total = integrate(f->value.grid(), f->value.host);
  });
}

rf_status rf_eigen(const rf_fields* f, const rf_params* p, rf_face_average avg,
                   rf_eigen_summary* out) {
  return guarded([&] {
    require(f, "fields");
    require(p, "params");
    require(out, "summary");
    const SpectralResult vs = lambda1_vs(f->value, p->value);
    const SpectralResult vi = lambda1_vi(f->value, p->value);
    const SpectralResult pr = lambda1_p(f->value, p->value, to_average(avg));
    out->lambda_vs = vs.lambda1;
    out->lambda_vi = vi.lambda1;
    out->lambda_p = pr.lambda1;
    out->residual_vs = vs.residual;
    out->residual_vi = vi.residual;
    out->residual_p = pr.residual;
    out->max_phi_s = *std::max_element(vs.eigenfunction.begin(), vs.eigenfunction.end());
    out->min_phi_i = *std::min_element(vi.eigenfunction.begin(), vi.eigenfunction.end());
    switch (classify_lambda(vs.lambda1)) {
      case Regime::Extinction: out->regime = RF_REGIME_EXTINCTION; break;
      case Regime::Persistence: out->regime = RF_REGIME_PERSISTENCE; break;
      case Regime::Marginal: out->regime = RF_REGIME_MARGINAL; break;
    }
  });
}

rf_status rf_eigen_dense(const rf_fields* f, const rf_params* p, double* lambda_vs,
                         double* lambda_vi) {
  return guarded([&] {
    require(f, "fields");
    require(p, "params");
    require(lambda_vs, "lambda_vs");
    require(lambda_vi, "lambda_vi");
    const StencilOperator lap = StencilOperator::laplacian(f->value.grid(), p->value.sigma_v);
    const Field ones(f->value.grid().size(), 1.0);
    *lambda_vs = dense_lambda1(lap, potential_vs(f->value, p->value), ones);
    *lambda_vi = dense_lambda1(lap, potential_vi(f->value, p->value), ones);
  });
}

rf_status rf_eigenfunction(const rf_fields* f, const rf_params* p, int which_vi,
                           double* buf, size_t len) {
  return guarded([&] {
    require(f, "fields");
    require(p, "params");
    const SpectralResult r =
        which_vi ? lambda1_vi(f->value, p->value) : lambda1_vs(f->value, p->value);
    copy_out(r.eigenfunction, buf, len);
  });
}

rf_status rf_frequency_curve(const rf_params* p, rf_grid grid, double area, const int* n,
                             size_t count, double* lambda) {
  return guarded([&] {
    require(p, "params");
    require(n, "frequency list");
    require(lambda, "output");
    const Grid g = to_grid(grid);
    // Validate every entry before solving anything.
    for (size_t k = 0; k < count; ++k) (void)refuge_frequency_mask(g, n[k], area);
    for (size_t k = 0; k < count; ++k) {
      lambda[k] = lambda1_for_frequency(p->value, g, area, n[k]);
    }
  });
}

rf_status rf_homogenized_limit(const rf_params* p, double area_fraction, double* limit) {
  return guarded([&] {
    require(p, "params");
    require(limit, "limit");
    *limit = homogenized_limit(p->value, area_fraction);
  });
}

const char* rf_regime_name(rf_regime r) {
  switch (r) {
    case RF_REGIME_EXTINCTION: return regime_name(Regime::Extinction);
    case RF_REGIME_PERSISTENCE: return regime_name(Regime::Persistence);
    case RF_REGIME_MARGINAL: return regime_name(Regime::Marginal);
  }
  return "unknown";
}

void rf_initial_defaults(rf_initial* ic) {
  if (ic == nullptr) return;
  const InitialCondition d;
  *ic = rf_initial{RF_IC_NONE, nullptr, 0.0, d.vi_scale, d.vs_scale, d.p0_scale};
}

void rf_sim_options_defaults(rf_sim_options* opts) {
  if (opts == nullptr) return;
  const MonitorConfig m;
  *opts = rf_sim_options{365.0 / 4.0, 4000, 0, RF_SCHEME_SEMI, RF_FACE_ARITHMETIC,
                         RF_MONITOR_WARN, m.clamp_tol, m.bound_tol};
}

rf_status rf_explicit_stable_dt(const rf_fields* f, const rf_params* p,
                                rf_face_average avg, double* dt) {
  return guarded([&] {
    require(f, "fields");
    require(p, "params");
    require(dt, "dt");
    Scenario sc;
    sc.fields = f->value;
    sc.params = p->value;
    sc.face_average = to_average(avg);
    *dt = explicit_stable_dt(sc);
  });
}

rf_status rf_simulate(const rf_fields* f, const rf_params* p, const rf_initial* ic,
                      const rf_sim_options* opts, rf_run** out) {
  return guarded([&] {
    require(out, "output handle");
    *out = nullptr;
    require(f, "fields");
    require(p, "params");
    require(ic, "initial condition");
    require(opts, "options");
    auto r = std::make_unique<rf_run>();
    r->scenario = make_scenario(f->value, p->value, to_initial(*ic), opts->horizon, opts->steps);
    r->scenario.snapshot_stride = opts->snapshot_stride;
    r->scenario.scheme = to_scheme(opts->scheme);
    r->scenario.face_average = to_average(opts->face_average);
    r->scenario.monitors = to_monitors(*opts);
    r->summary = run(r->scenario);
    *out = r.release();
  });
}

void rf_run_free(rf_run* r) { delete r; }

size_t rf_run_series_count(const rf_run* r) {
  return r == nullptr ? 0 : r->summary.series.size();
}

rf_status rf_run_series(const rf_run* r, rf_series_row* rows, size_t cap) {
  return guarded([&] {
    require(r, "run");
    require(rows, "rows");
    const auto& series = r->summary.series;
    if (cap < series.size()) throw InvalidArgument("row buffer too small");
    for (size_t k = 0; k < series.size(); ++k) {
      const SeriesRow& s = series[k];
      rows[k] = rf_series_row{s.t,     s.sup_i,  s.sup_vi, s.sup_vs,       s.sup_p,
                              s.int_i, s.int_v,  s.int_p,  s.sup_v,        s.inf_vi,
                              s.min_i_over_h, s.max_i_over_h};
    }
  });
}

size_t rf_run_snapshot_count(const rf_run* r) {
  if (r == nullptr) return 0;
  return r->summary.snapshots.empty() ? 2 : r->summary.snapshots.size();
}

rf_status rf_run_snapshot(const rf_run* r, size_t index, rf_field_kind kind, double* buf,
                          size_t len, double* t) {
  return guarded([&] {
    require(r, "run");
    const State& s = snapshot_at(*r, index);
    copy_out(field_of(s, kind), buf, len);
    if (t != nullptr) *t = s.t;
  });
}

rf_status rf_run_closed_form_gap(const rf_run* r, double* gap) {
  return guarded([&] {
    require(r, "run");
    require(gap, "gap");
    const State& s = r->summary.final_state;
    const Field exact = closed_form_infected(r->scenario.fields.host, s.cum_vi,
                                             r->scenario.params.beta_vh);
    double worst = 0.0;
    for (size_t c = 0; c < exact.size(); ++c) {
      worst = std::max(worst, std::abs(exact[c] - s.infected[c]));
    }
    *gap = worst;
  });
}

rf_status rf_run_monitors(const rf_run* r, rf_monitor_report* out) {
  return guarded([&] {
    require(r, "run");
    require(out, "report");
    const MonitorReport& m = r->summary.monitors;
    *out = rf_monitor_report{m.clamp_mass,          m.clamp_fraction(),
                             m.clamp_events,        m.worst_vector_ratio,
                             m.worst_predator_ratio, m.infection_violations,
                             m.breaches.size()};
  });
}

const char* rf_run_breach(const rf_run* r, size_t index) {
  if (r == nullptr || index >= r->summary.monitors.breaches.size()) return nullptr;
  return r->summary.monitors.breaches[index].c_str();
}

rf_status rf_run_harvest(const rf_run* r, rf_harvest* out) {
  return guarded([&] {
    require(r, "run");
    require(out, "harvest");
    const double decay = late_decay_rate(r->summary);
    const HarvestReport h =
        harvest(r->summary.final_state, r->scenario.fields, r->scenario.params, decay);
    *out = rf_harvest{h.harvest, h.total_hosts, h.ratio, decay, h.tail_bound};
  });
}

rf_status rf_run_envelope(const rf_run* r, double eps, double slack, rf_envelope* out) {
  return guarded([&] {
    require(r, "run");
    require(out, "envelope");
    const CoefficientFields& f = r->scenario.fields;
    const ModelParams& p = r->scenario.params;
    if (!(eps > 0.0)) eps = default_eps(lambda1_vs(f, p).lambda1, p);
    const EnvelopeReport e = trajectory_envelope(f, p, r->summary, eps, slack);
    *out = rf_envelope{};
    out->applicable = e.applicable;
    out->holds = e.holds();
    out->eps = e.eps;
    out->decay_s = e.decay_s;
    out->decay_i = e.decay_i;
    out->max_phi_s = e.max_phi_s;
    out->min_phi_i = e.min_phi_i;
    out->v_bound_at_zero = e.v_bound_at_zero;
    out->i_upper = e.i_upper;
    out->i_lower_limit = e.i_lower_limit;
    out->worst_v = e.worst_v;
    out->worst_i_upper = e.worst_i_upper;
    out->worst_i_lower = e.worst_i_lower;
    out->slack = e.slack;
    copy_message(out->message, e.message);
  });
}

rf_status rf_run_persistence(const rf_run* r, double tol, double burn_in,
                             double gap_threshold, rf_persistence* out) {
  return guarded([&] {
    require(r, "run");
    require(out, "verdict");
    const PersistenceVerdict v =
        persistence_check(r->summary, r->scenario.fields, tol, burn_in, gap_threshold);
    *out = rf_persistence{};
    out->applicable = v.applicable;
    out->passed = v.passed();
    out->vectors_persist = v.vectors_persist;
    out->hosts_saturated = v.hosts_saturated;
    out->min_inf_vi = v.min_inf_vi;
    out->infection_gap = v.infection_gap;
    copy_message(out->message, v.message);
  });
}

rf_status rf_harvest_sandwich(const rf_fields* f, const rf_params* p, double v0_sup,
                              double vi0_inf, double eps, double p0_deviation,
                              rf_bounds* out) {
  return guarded([&] {
    require(f, "fields");
    require(p, "params");
    require(out, "bounds");
    const SpectralResult vs = lambda1_vs(f->value, p->value);
    const SpectralResult vi = lambda1_vi(f->value, p->value);
    if (!(eps > 0.0)) eps = default_eps(vs.lambda1, p->value);
    const HarvestSandwich b =
        harvest_sandwich(vs, vi, p->value, v0_sup, vi0_inf, eps, p0_deviation);
    *out = rf_bounds{b.lower, b.upper, b.lambda_vs, b.lambda_vi, b.max_phi_s, b.min_phi_i, eps};
  });
}

rf_status rf_sweep(const rf_sweep_spec* spec, rf_sweep_row* rows) {
  return guarded([&] {
    require(spec, "sweep spec");
    require(spec->params, "sweep params");
    require(rows, "rows");
    if (spec->count > 0) require(spec->values, "axis values");
    SweepSpec s;
    s.base.params = spec->params->value;
    s.base.grid = to_grid(spec->grid);
    s.base.refuge_area = spec->refuge_area;
    s.base.ic = to_initial(spec->initial);
    s.base.horizon = spec->options.horizon;
    s.base.steps = spec->options.steps;
    s.base.scheme = to_scheme(spec->options.scheme);
    s.base.face_average = to_average(spec->options.face_average);
    s.base.monitors = to_monitors(spec->options);
    switch (spec->axis) {
      case RF_AXIS_FREQUENCY: s.axis = SweepAxis::Frequency; break;
      case RF_AXIS_QUANTITY: s.axis = SweepAxis::Quantity; break;
      default: throw InvalidArgument("unknown sweep axis");
    }
    s.values.assign(spec->values, spec->values + spec->count);
    s.threads = spec->threads;
    const SweepTable table = run_sweep(s);
    for (size_t k = 0; k < table.rows.size(); ++k) {
      const SweepRow& row = table.rows[k];
      rows[k] = rf_sweep_row{};
      rows[k].axis_value = row.axis_value;
      rows[k].lambda1 = row.lambda1;
      rows[k].harvest = row.harvest;
      rows[k].healthy_fraction = row.healthy_fraction;
      rows[k].ok = row.ok;
      copy_message(rows[k].message, row.message);
    }
  });
}

}  // extern "C"
