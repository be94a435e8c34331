#pragma once

#include <optional>
#include <string>

#include "refugia/coefficients.hpp"
#include "refugia/dynamics.hpp"
#include "refugia/spectral.hpp"

namespace refugia {

struct HarvestReport {
  double harvest = 0.0;      // int (H - I(T)), beets
  double total_hosts = 0.0;  // int H, beets
  double ratio = 0.0;        // harvest / total_hosts
  // Upper bound, in beets, on the hosts still to be infected after T.
  // Infinite when the vector decay rate is not positive.
  double tail_bound = 0.0;
  std::optional<double> lower;
  std::optional<double> upper;

  double tail_fraction() const {
    return total_hosts > 0.0 ? tail_bound / total_hosts : 0.0;
  }
};

HarvestReport harvest(const State& final_state, const CoefficientFields& fields,
                      const ModelParams& params, double decay_rate);

/// Decay rate of sup V fitted over the last `fraction` of the run.
double late_decay_rate(const RunSummary& run, double fraction = 0.5);

struct HarvestSandwich {
  double lower = 1.0;
  double upper = 1.0;
  double lambda_vs = 0.0;
  double lambda_vi = 0.0;
  double max_phi_s = 1.0;  // phi_s normalized to min 1
  double min_phi_i = 1.0;  // phi_i normalized to max 1
};

/// 0.5 * lambda1(L_Vs) / h.
double default_eps(double lambda_vs, const ModelParams& params);

/// Harvest sandwich for well-prepared data (sup V0 <= eps and
/// sup |P0 - r_P/s_P| <= eps). Throws InvalidArgument otherwise, or when
/// lambda1(L_Vs) - h eps <= 0.
HarvestSandwich harvest_sandwich(const SpectralResult& vs,
                                 const SpectralResult& vi,
                                 const ModelParams& params, double v0_sup,
                                 double vi0_inf, double eps,
                                 double p0_deviation = 0.0);

HarvestSandwich harvest_sandwich(const CoefficientFields& fields,
                                 const ModelParams& params, double v0_sup,
                                 double vi0_inf, double eps,
                                 double p0_deviation = 0.0);

struct EnvelopeReport {
  bool applicable = false;
  std::string message;
  double eps = 0.0;
  double decay_s = 0.0;  // lambda1(L_Vs) - h eps
  double decay_i = 0.0;  // lambda1(L_Vi) + s_V eps + h eps
  double max_phi_s = 1.0;
  double min_phi_i = 1.0;
  double v_bound_at_zero = 0.0;  // sup V0 * max phi_s
  double i_upper = 1.0;          // time-independent bound on I/H
  double i_lower_limit = 0.0;    // lower bound on I/H as t -> infinity
  // Worst observed value / bound over all samples. The upper bounds hold
  // when these are <= 1; the lower bound holds when worst_i_lower >= 1.
  double worst_v = 0.0;
  double worst_i_upper = 0.0;
  double worst_i_lower = 1.0;
  double slack = 0.05;

  bool holds() const {
    return applicable && worst_v <= 1.0 + slack &&
           worst_i_upper <= 1.0 + slack && worst_i_lower >= 1.0 - slack;
  }
};

/// Checks the extinction-case trajectory estimates along every recorded
/// sample of `run`. Not applicable (with a message) outside the extinction
/// regime or for ill-prepared data.
EnvelopeReport trajectory_envelope(const CoefficientFields& fields,
                                   const ModelParams& params,
                                   const RunSummary& run, double eps,
                                   double slack = 0.05);

struct PersistenceVerdict {
  bool applicable = false;
  std::string message;
  double min_inf_vi = 0.0;      // inf_x V_i over samples after burn-in
  double infection_gap = 1.0;   // sup |I(T) - H| / sup H
  bool vectors_persist = false;
  bool hosts_saturated = false;

  bool passed() const { return applicable && vectors_persist && hosts_saturated; }
};

PersistenceVerdict persistence_check(const RunSummary& run,
                                     const CoefficientFields& fields,
                                     double tol, double burn_in,
                                     double gap_threshold = 1e-2);

}  // namespace refugia
