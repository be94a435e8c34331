#include "refugia/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "refugia/error.hpp"

namespace refugia {

namespace {

double max_of(std::span<const double> f) {
  return *std::max_element(f.begin(), f.end());
}

double min_of(std::span<const double> f) {
  return *std::min_element(f.begin(), f.end());
}

// Largest face conductivity seen from a cell, relative to the cell's own
// value. Bounds the effective diffusivity of the explicit predator update.
double predator_face_ratio(const StencilOperator& op,
                           std::span<const double> r_p) {
  const Grid& g = op.grid();
  const auto wx = op.x_weights();
  const auto wy = op.y_weights();
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t c = g.index(i, j);
      double w = 0.0;
      if (i > 0) w = std::max(w, wx[static_cast<std::size_t>(j) * (g.nx - 1) + i - 1]);
      if (i + 1 < g.nx) w = std::max(w, wx[static_cast<std::size_t>(j) * (g.nx - 1) + i]);
      if (j > 0) w = std::max(w, wy[c - g.nx]);
      if (j + 1 < g.ny) w = std::max(w, wy[c]);
      worst = std::max(worst, w / r_p[c]);
    }
  }
  return worst;
}

}  // namespace

State build_initial_state(const CoefficientFields& fields,
                          const ModelParams& params,
                          const InitialCondition& ic) {
  const Grid& g = fields.grid();
  const std::size_t n = g.size();
  if (ic.vi_scale < 0.0 || ic.vs_scale < 0.0 || ic.p0_scale < 0.0) {
    throw InvalidArgument("initial-condition scales must be nonnegative");
  }
  Field shape;
  switch (ic.kind) {
    case InitialCondition::Kind::None:
      shape.assign(n, 0.0);
      break;
    case InitialCondition::Kind::Uniform:
    case InitialCondition::Kind::Constant:
      shape.assign(n, 1.0);
      break;
    case InitialCondition::Kind::Patches:
      shape = patches_field(g, ic.layout);
      break;
    case InitialCondition::Kind::CenteredPatch:
      shape = patches_field(g, centered_patch(ic.refuge_area));
      break;
  }
  State s;
  s.infected.assign(n, 0.0);
  s.cum_vi.assign(n, 0.0);
  s.vi.resize(n);
  s.vs.resize(n);
  s.pred.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    const double capacity = ic.kind == InitialCondition::Kind::Constant
                                ? 1.0
                                : fields.r_v[c] / params.s_v;
    s.vi[c] = ic.vi_scale * capacity * shape[c];
    s.vs[c] = ic.vs_scale * capacity * shape[c];
    s.pred[c] = ic.p0_scale * fields.r_p[c] / params.s_p;
  }
  return s;
}

int Scenario::steps() const {
  return static_cast<int>(std::llround(std::ceil(horizon / dt - 1e-9)));
}

void Scenario::validate() const {
  params.validate();
  if (!(dt > 0.0) || !(horizon >= dt)) {
    throw InvalidArgument("need dt > 0 and horizon >= dt");
  }
  if (snapshot_stride < 0) throw InvalidArgument("snapshot stride must be >= 0");
  const std::size_t n = fields.grid().size();
  for (const Field* f : {&initial.infected, &initial.vi, &initial.vs,
                         &initial.pred, &initial.cum_vi}) {
    if (f->size() != n) throw InvalidArgument("initial state does not match grid");
    for (double v : *f) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw InvalidArgument("initial fields must be finite and nonnegative");
      }
    }
  }
  if (std::any_of(initial.infected.begin(), initial.infected.end(),
                  [](double v) { return v != 0.0; })) {
    throw InvalidArgument("initial infected hosts must vanish");
  }
  if (scheme == Scheme::Explicit) {
    const double bound = explicit_stable_dt(*this);
    if (dt > bound) {
      std::ostringstream msg;
      msg << "explicit scheme needs dt <= " << bound << " days (got " << dt
          << ")";
      throw InvalidArgument(msg.str());
    }
  }
}

Scenario make_scenario(const CoefficientFields& fields,
                       const ModelParams& params, const InitialCondition& ic,
                       double horizon, int steps) {
  if (steps < 1) throw InvalidArgument("need at least one time step");
  Scenario s;
  s.fields = fields;
  s.params = params;
  s.initial = build_initial_state(fields, params, ic);
  s.horizon = horizon;
  s.dt = horizon / steps;
  return s;
}

double explicit_stable_dt(const Scenario& scenario) {
  const Grid& g = scenario.fields.grid();
  const StencilOperator pred_op = StencilOperator::weighted(
      g, scenario.params.sigma_p, scenario.fields.r_p, scenario.face_average);
  const double sigma_eff =
      std::max(scenario.params.sigma_v,
               scenario.params.sigma_p * predator_face_ratio(pred_op, scenario.fields.r_p));
  const double h = std::min(g.dx, g.dy);
  return h * h / (4.0 * sigma_eff);
}

SeriesRow summarize(const Grid& grid, const State& s,
                    std::span<const double> host) {
  SeriesRow r;
  r.t = s.t;
  r.sup_i = max_of(s.infected);
  r.sup_vi = max_of(s.vi);
  r.sup_vs = max_of(s.vs);
  r.sup_p = max_of(s.pred);
  r.inf_vi = min_of(s.vi);
  r.int_i = integrate(grid, s.infected);
  r.int_v = integrate(grid, s.vi) + integrate(grid, s.vs);
  r.int_p = integrate(grid, s.pred);
  double sup_v = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t c = 0; c < s.vi.size(); ++c) {
    sup_v = std::max(sup_v, s.vi[c] + s.vs[c]);
    if (host[c] > 0.0) {
      const double ratio = s.infected[c] / host[c];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  r.sup_v = sup_v;
  r.min_i_over_h = std::isfinite(lo) ? lo : 0.0;
  r.max_i_over_h = hi;
  return r;
}

Stepper::Stepper(const Scenario& scenario)
    : sc_(scenario),
      vec_op_(StencilOperator::laplacian(scenario.fields.grid(),
                                         scenario.params.sigma_v)),
      pred_op_(StencilOperator::weighted(scenario.fields.grid(),
                                         scenario.params.sigma_p,
                                         scenario.fields.r_p,
                                         scenario.face_average)) {
  scenario.validate();
  const CoefficientFields& f = scenario.fields;
  const ModelParams& p = scenario.params;
  const State& init = scenario.initial;
  double sup_v0 = 0.0;
  double sup_p0 = 0.0;
  for (std::size_t c = 0; c < init.vi.size(); ++c) {
    sup_v0 = std::max(sup_v0, init.vi[c] + init.vs[c]);
    sup_p0 = std::max(sup_p0, init.pred[c] / f.r_p[c]);
  }
  vector_bound_ = std::max(sup_v0, max_of(f.r_v) / p.s_v);
  predator_bound_ =
      std::max(sup_p0, 1.0 / p.s_p + p.gamma * p.h * vector_bound_ /
                                         (p.s_p * min_of(f.r_p)));
  const std::size_t n = f.grid().size();
  rhs_i_.resize(n);
  rhs_s_.resize(n);
  rhs_p_.resize(n);
  tmp_.resize(n);
}

void Stepper::clamp(Field& f) {
  double mass = 0.0;
  for (double& v : f) {
    if (v < 0.0) {
      mass -= v;
      v = 0.0;
      ++report_.clamp_events;
    }
  }
  report_.clamp_mass += mass * sc_.fields.grid().cell_area();
}

void Stepper::advance(State& s) {
  const CoefficientFields& f = sc_.fields;
  const ModelParams& p = sc_.params;
  const Grid& g = f.grid();
  const double dt = sc_.dt;
  const std::size_t n = g.size();

  State before;
  if (sc_.monitors.infection) before = s;

  Field vi_old = s.vi;
  for (std::size_t c = 0; c < n; ++c) {
    const double inf = s.infected[c];
    const double vi = s.vi[c];
    const double vs = s.vs[c];
    const double pr = s.pred[c];
    const double host = f.host[c];
    const double v = vi + vs;
    rhs_i_[c] = vi + dt * (p.beta_hv * inf * vs - p.alpha * vi - f.d_v[c] * vi -
                           p.s_v * v * vi - p.h * pr * vi);
    rhs_s_[c] = vs + dt * (-p.beta_hv * inf * vs + p.alpha * vi -
                           f.d_v[c] * vs - p.s_v * v * vs - p.h * pr * vs +
                           f.b_v[c] * v);
    rhs_p_[c] = pr + dt * (p.gamma * p.h * v * pr + f.r_p[c] * pr -
                           p.s_p * pr * pr);
    s.infected[c] = std::clamp(inf + dt * p.beta_vh * (host - inf) * vi, 0.0, host);
  }

  if (sc_.scheme == Scheme::SemiImplicit) {
    s.vi = implicit_diffusion_solve(rhs_i_, vec_op_, dt, sc_.solve);
    s.vs = implicit_diffusion_solve(rhs_s_, vec_op_, dt, sc_.solve);
    const Field scaled =
        implicit_diffusion_solve(rhs_p_, pred_op_, dt, sc_.solve, f.r_p);
    for (std::size_t c = 0; c < n; ++c) s.pred[c] = f.r_p[c] * scaled[c];
  } else {
    vec_op_.apply(s.vi, tmp_);
    for (std::size_t c = 0; c < n; ++c) rhs_i_[c] += dt * tmp_[c];
    vec_op_.apply(s.vs, tmp_);
    for (std::size_t c = 0; c < n; ++c) rhs_s_[c] += dt * tmp_[c];
    Field scaled(n);
    for (std::size_t c = 0; c < n; ++c) scaled[c] = s.pred[c] / f.r_p[c];
    pred_op_.apply(scaled, tmp_);
    for (std::size_t c = 0; c < n; ++c) rhs_p_[c] += dt * tmp_[c];
    s.vi = rhs_i_;
    s.vs = rhs_s_;
    s.pred = rhs_p_;
  }

  clamp(s.vi);
  clamp(s.vs);
  clamp(s.pred);

  for (std::size_t c = 0; c < n; ++c) {
    s.cum_vi[c] += 0.5 * dt * (vi_old[c] + s.vi[c]);
  }
  s.t += dt;

  check_invariants(before, s);
}

void Stepper::check_invariants(const State& before, const State& after) {
  const MonitorConfig& cfg = sc_.monitors;
  const CoefficientFields& f = sc_.fields;
  const Grid& g = f.grid();
  std::vector<std::string> found;

  if (cfg.clamp) {
    const double integral = integrate(g, after.vi) + integrate(g, after.vs) +
                            integrate(g, after.pred);
    report_.field_integral = std::max(report_.field_integral, integral);
    if (report_.clamp_fraction() > cfg.clamp_tol) {
      std::ostringstream msg;
      msg << "clamped mass fraction " << report_.clamp_fraction()
          << " exceeds " << cfg.clamp_tol << " at t=" << after.t
          << "; reduce dt";
      found.push_back(msg.str());
    }
  }
  if (cfg.infection) {
    long bad = 0;
    for (std::size_t c = 0; c < after.infected.size(); ++c) {
      const double v = after.infected[c];
      if (v < before.infected[c] || v < 0.0 || v > f.host[c]) ++bad;
    }
    if (bad > 0) {
      report_.infection_violations += bad;
      found.push_back("infected hosts left [previous, H] in " +
                      std::to_string(bad) + " cells at t=" +
                      std::to_string(after.t));
    }
  }
  if (cfg.vector_bound) {
    double sup_v = 0.0;
    for (std::size_t c = 0; c < after.vi.size(); ++c) {
      sup_v = std::max(sup_v, after.vi[c] + after.vs[c]);
    }
    const double ratio = sup_v / vector_bound_;
    report_.worst_vector_ratio = std::max(report_.worst_vector_ratio, ratio);
    if (ratio > 1.0 + cfg.bound_tol) {
      found.push_back("vector density exceeds its supersolution bound by " +
                      std::to_string(ratio - 1.0));
    }
  }
  if (cfg.predator_bound) {
    double sup = 0.0;
    for (std::size_t c = 0; c < after.pred.size(); ++c) {
      sup = std::max(sup, after.pred[c] / f.r_p[c]);
    }
    const double ratio = sup / predator_bound_;
    report_.worst_predator_ratio = std::max(report_.worst_predator_ratio, ratio);
    if (ratio > 1.0 + cfg.bound_tol) {
      found.push_back("predator density exceeds its supersolution bound by " +
                      std::to_string(ratio - 1.0));
    }
  }

  for (std::string& msg : found) {
    if (cfg.mode == MonitorMode::Abort) throw MonitorError(msg);
    if (report_.breaches.size() < 64) report_.breaches.push_back(std::move(msg));
  }
}

State step(const State& state, const Scenario& scenario) {
  Stepper stepper(scenario);
  State next = state;
  stepper.advance(next);
  return next;
}

RunSummary run(const Scenario& scenario) {
  Stepper stepper(scenario);
  const Grid& g = scenario.fields.grid();
  const int steps = scenario.steps();
  RunSummary out;
  out.initial = scenario.initial;
  out.series.reserve(static_cast<std::size_t>(steps) + 1);
  State s = scenario.initial;
  out.series.push_back(summarize(g, s, scenario.fields.host));
  const int stride = scenario.snapshot_stride;
  if (stride > 0) out.snapshots.push_back(s);
  for (int k = 1; k <= steps; ++k) {
    stepper.advance(s);
    s.t = scenario.initial.t + k * scenario.dt;  // no drift from repeated sums
    out.series.push_back(summarize(g, s, scenario.fields.host));
    if (stride > 0 && (k % stride == 0 || k == steps)) out.snapshots.push_back(s);
  }
  out.final_state = std::move(s);
  out.monitors = stepper.report();
  return out;
}

Field closed_form_infected(std::span<const double> host,
                           std::span<const double> cum_vi, double beta_vh) {
  if (host.size() != cum_vi.size()) {
    throw InvalidArgument("host and cumulative fields differ in size");
  }
  Field out(host.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (cum_vi[c] < 0.0) throw InvalidArgument("cumulative V_i must be >= 0");
    out[c] = host[c] * -std::expm1(-beta_vh * cum_vi[c]);
  }
  return out;
}

double fit_decay_rate(std::span<const double> times,
                      std::span<const double> values, double t0, double t1) {
  if (times.size() != values.size()) {
    throw InvalidArgument("time and value series differ in length");
  }
  double st = 0.0;
  double sy = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t0 || times[k] > t1) continue;
    if (!(values[k] > 0.0)) {
      throw InvalidArgument("decay fit window contains non-positive values");
    }
    st += times[k];
    sy += std::log(values[k]);
    ++count;
  }
  if (count < 2) throw InvalidArgument("decay fit window holds fewer than 2 samples");
  const double tm = st / count;
  const double ym = sy / count;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t0 || times[k] > t1) continue;
    const double dtk = times[k] - tm;
    num += dtk * (std::log(values[k]) - ym);
    den += dtk * dtk;
  }
  if (den == 0.0) throw InvalidArgument("decay fit window has a single time");
  return -num / den;
}

}  // namespace refugia
