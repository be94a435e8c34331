#include "refugia/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "refugia/error.hpp"

namespace refugia {

HarvestReport harvest(const State& final_state, const CoefficientFields& fields,
                      const ModelParams& params, double decay_rate) {
  const Grid& g = fields.grid();
  HarvestReport r;
  double healthy = 0.0;
  for (std::size_t c = 0; c < fields.host.size(); ++c) {
    healthy += fields.host[c] - final_state.infected[c];
  }
  r.harvest = healthy * g.cell_area();
  r.total_hosts = integrate(g, fields.host);
  r.ratio = r.total_hosts > 0.0 ? r.harvest / r.total_hosts : 0.0;
  const double sup_vi =
      *std::max_element(final_state.vi.begin(), final_state.vi.end());
  if (sup_vi == 0.0) {
    r.tail_bound = 0.0;
  } else if (decay_rate > 0.0) {
    r.tail_bound = r.total_hosts * params.beta_vh * sup_vi / decay_rate;
  } else {
    r.tail_bound = std::numeric_limits<double>::infinity();
  }
  return r;
}

double late_decay_rate(const RunSummary& run, double fraction) {
  if (run.series.size() < 2) return 0.0;
  std::vector<double> t, v;
  t.reserve(run.series.size());
  v.reserve(run.series.size());
  for (const SeriesRow& row : run.series) {
    t.push_back(row.t);
    v.push_back(row.sup_v);
  }
  const double t_end = t.back();
  // Short runs still get a two-point fit.
  const double t_start =
      std::min(t_end - fraction * (t_end - t.front()), t[t.size() - 2]);
  // A vanished vector population decays "infinitely fast"; report 0 rate
  // and let the zero tail speak for itself.
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] >= t_start && !(v[k] > 0.0)) return 0.0;
  }
  return fit_decay_rate(t, v, t_start, t_end);
}

double default_eps(double lambda_vs, const ModelParams& params) {
  return 0.5 * lambda_vs / params.h;
}

HarvestSandwich harvest_sandwich(const SpectralResult& vs,
                                 const SpectralResult& vi,
                                 const ModelParams& params, double v0_sup,
                                 double vi0_inf, double eps,
                                 double p0_deviation) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  const double decay_s = vs.lambda1 - params.h * eps;
  if (!(decay_s > 0.0)) {
    std::ostringstream msg;
    msg << "eps = " << eps << " violates lambda1(L_Vs) - h eps > 0 (lambda1 = "
        << vs.lambda1 << ")";
    throw InvalidArgument(msg.str());
  }
  if (v0_sup < 0.0 || vi0_inf < 0.0 || vi0_inf > v0_sup) {
    throw InvalidArgument("need 0 <= inf V_i0 <= sup V0");
  }
  if (v0_sup > eps || p0_deviation > eps) {
    throw InvalidArgument(
        "initial data are not well prepared (need sup V0 <= eps and "
        "sup |P0 - r_P/s_P| <= eps)");
  }
  HarvestSandwich b;
  b.lambda_vs = vs.lambda1;
  b.lambda_vi = vi.lambda1;
  b.max_phi_s = *std::max_element(vs.eigenfunction.begin(), vs.eigenfunction.end()) /
                *std::min_element(vs.eigenfunction.begin(), vs.eigenfunction.end());
  b.min_phi_i = *std::min_element(vi.eigenfunction.begin(), vi.eigenfunction.end()) /
                *std::max_element(vi.eigenfunction.begin(), vi.eigenfunction.end());
  const double decay_i = vi.lambda1 + params.s_v * eps + params.h * eps;
  b.lower = std::exp(-params.beta_vh * v0_sup * b.max_phi_s / decay_s);
  b.upper = std::exp(-params.beta_vh * vi0_inf * b.min_phi_i / decay_i);
  return b;
}

HarvestSandwich harvest_sandwich(const CoefficientFields& fields,
                                 const ModelParams& params, double v0_sup,
                                 double vi0_inf, double eps,
                                 double p0_deviation) {
  const SpectralResult vs = lambda1_vs(fields, params);
  const SpectralResult vi = lambda1_vi(fields, params);
  return harvest_sandwich(vs, vi, params, v0_sup, vi0_inf, eps, p0_deviation);
}

EnvelopeReport trajectory_envelope(const CoefficientFields& fields,
                                   const ModelParams& params,
                                   const RunSummary& run, double eps,
                                   double slack) {
  EnvelopeReport rep;
  rep.eps = eps;
  rep.slack = slack;
  const SpectralResult vs = lambda1_vs(fields, params);
  if (!(vs.lambda1 > 0.0)) {
    rep.message = "not in the extinction regime (lambda1(L_Vs) <= 0)";
    return rep;
  }
  rep.decay_s = vs.lambda1 - params.h * eps;
  if (!(eps > 0.0) || !(rep.decay_s > 0.0)) {
    rep.message = "eps must satisfy 0 < eps < lambda1(L_Vs) / h";
    return rep;
  }
  const State& init = run.initial;
  double v0_max = 0.0;
  double vi0_min = std::numeric_limits<double>::infinity();
  double p0_dev = 0.0;
  for (std::size_t c = 0; c < init.vi.size(); ++c) {
    v0_max = std::max(v0_max, init.vi[c] + init.vs[c]);
    vi0_min = std::min(vi0_min, init.vi[c]);
    p0_dev = std::max(p0_dev,
                      std::abs(init.pred[c] - fields.r_p[c] / params.s_p));
  }
  if (v0_max > eps || p0_dev > eps) {
    rep.message =
        "ill-prepared initial data (sup V0 or sup |P0 - r_P/s_P| exceeds "
        "eps); envelope check disabled";
    return rep;
  }
  const SpectralResult vi = lambda1_vi(fields, params);
  const HarvestSandwich b =
      harvest_sandwich(vs, vi, params, v0_max, vi0_min, eps, p0_dev);
  rep.applicable = true;
  rep.max_phi_s = b.max_phi_s;
  rep.min_phi_i = b.min_phi_i;
  rep.decay_i = vi.lambda1 + params.s_v * eps + params.h * eps;
  rep.v_bound_at_zero = v0_max * b.max_phi_s;
  rep.i_upper = 1.0 - b.lower;
  const double i_rate = params.beta_vh * vi0_min * b.min_phi_i;
  rep.i_lower_limit = -std::expm1(-i_rate / rep.decay_i);

  rep.worst_v = 0.0;
  rep.worst_i_upper = 0.0;
  rep.worst_i_lower = std::numeric_limits<double>::infinity();
  for (const SeriesRow& row : run.series) {
    const double v_bound = rep.v_bound_at_zero * std::exp(-rep.decay_s * row.t);
    if (v_bound > 0.0) {
      rep.worst_v = std::max(rep.worst_v, row.sup_v / v_bound);
    } else if (row.sup_v > 0.0) {
      rep.worst_v = std::numeric_limits<double>::infinity();
    }
    if (rep.i_upper > 0.0) {
      rep.worst_i_upper = std::max(rep.worst_i_upper, row.max_i_over_h / rep.i_upper);
    } else if (row.max_i_over_h > 0.0) {
      rep.worst_i_upper = std::numeric_limits<double>::infinity();
    }
    const double lower =
        -std::expm1(-i_rate * -std::expm1(-rep.decay_i * row.t) / rep.decay_i);
    if (lower > 0.0) {
      rep.worst_i_lower = std::min(rep.worst_i_lower, row.min_i_over_h / lower);
    }
  }
  if (!std::isfinite(rep.worst_i_lower)) rep.worst_i_lower = 1.0;
  rep.message = rep.holds() ? "all bounds hold" : "bound violated beyond slack";
  return rep;
}

PersistenceVerdict persistence_check(const RunSummary& run,
                                     const CoefficientFields& fields,
                                     double tol, double burn_in,
                                     double gap_threshold) {
  PersistenceVerdict v;
  const bool seeded = std::any_of(run.initial.vi.begin(), run.initial.vi.end(),
                                  [](double x) { return x > 0.0; });
  if (!seeded) {
    v.message = "no initial infected vectors; persistence check not applicable";
    return v;
  }
  v.applicable = true;
  v.min_inf_vi = std::numeric_limits<double>::infinity();
  for (const SeriesRow& row : run.series) {
    if (row.t >= burn_in) v.min_inf_vi = std::min(v.min_inf_vi, row.inf_vi);
  }
  if (!std::isfinite(v.min_inf_vi)) v.min_inf_vi = 0.0;
  v.vectors_persist = v.min_inf_vi >= tol;

  double gap = 0.0;
  const double sup_h = *std::max_element(fields.host.begin(), fields.host.end());
  for (std::size_t c = 0; c < fields.host.size(); ++c) {
    gap = std::max(gap, std::abs(run.final_state.infected[c] - fields.host[c]));
  }
  v.infection_gap = sup_h > 0.0 ? gap / sup_h : 0.0;
  v.hosts_saturated = v.infection_gap <= gap_threshold;
  std::ostringstream msg;
  msg << "inf V_i after burn-in " << v.min_inf_vi << " (tol " << tol
      << "), host infection gap " << v.infection_gap << " (threshold "
      << gap_threshold << ")";
  v.message = msg.str();
  return v;
}

}  // namespace refugia
