#pragma once

#include <span>
#include <string>
#include <vector>

#include "refugia/coefficients.hpp"
#include "refugia/geometry.hpp"
#include "refugia/operators.hpp"

namespace refugia {

/// The four population fields at one instant plus the running integral of
/// infected vectors (used for the closed-form host infection).
struct State {
  Field infected;  // I, beets/m^2
  Field vi;        // infected vectors, aphids/m^2
  Field vs;        // susceptible vectors, aphids/m^2
  Field pred;      // predators/m^2
  Field cum_vi;    // int_0^t V_i ds, aphid day/m^2
  double t = 0.0;
};

enum class Scheme { SemiImplicit, Explicit };
enum class MonitorMode { Warn, Abort };

struct InitialCondition {
  // Constant takes vi_scale and vs_scale as absolute densities instead of
  // fractions of r_V / s_V.
  enum class Kind { None, Patches, CenteredPatch, Uniform, Constant };

  Kind kind = Kind::None;
  PatchSpec layout;        // Patches: densities multiply the vector scales
  double refuge_area = 0;  // CenteredPatch: area of the frequency-1 square
  double vi_scale = 0.01;  // V_i0 = vi_scale * r_V / s_V * shape
  double vs_scale = 0.09;  // V_s0 = vs_scale * r_V / s_V * shape
  double p0_scale = 1.0;   // P0 = p0_scale * r_P / s_P
};

State build_initial_state(const CoefficientFields& fields,
                          const ModelParams& params,
                          const InitialCondition& ic);

struct MonitorConfig {
  MonitorMode mode = MonitorMode::Warn;
  bool clamp = true;
  bool infection = true;
  bool vector_bound = true;
  bool predator_bound = true;
  double clamp_tol = 1e-8;   // clamp mass relative to the field integral
  double bound_tol = 1e-6;   // relative slack on the supersolution bounds
};

struct MonitorReport {
  double clamp_mass = 0.0;       // total clamped density times cell area
  double field_integral = 0.0;   // largest int(V_i + V_s + P) seen
  long clamp_events = 0;
  double worst_vector_ratio = 0.0;    // sup V / bound
  double worst_predator_ratio = 0.0;  // sup (P / r_P) / bound
  long infection_violations = 0;
  std::vector<std::string> breaches;

  double clamp_fraction() const {
    return field_integral > 0.0 ? clamp_mass / field_integral : 0.0;
  }
};

struct Scenario {
  CoefficientFields fields;
  ModelParams params;
  State initial;
  double horizon = 0.0;
  double dt = 0.0;
  int snapshot_stride = 0;  // 0 disables snapshots
  Scheme scheme = Scheme::SemiImplicit;
  FaceAverage face_average = FaceAverage::Arithmetic;
  MonitorConfig monitors;
  SolveOptions solve;

  int steps() const;
  void validate() const;
};

Scenario make_scenario(const CoefficientFields& fields,
                       const ModelParams& params, const InitialCondition& ic,
                       double horizon, int steps);

/// Largest stable step of the fully explicit scheme.
double explicit_stable_dt(const Scenario& scenario);

struct SeriesRow {
  double t = 0.0;
  double sup_i = 0.0;
  double sup_vi = 0.0;
  double sup_vs = 0.0;
  double sup_p = 0.0;
  double int_i = 0.0;
  double int_v = 0.0;
  double int_p = 0.0;
  double sup_v = 0.0;
  double inf_vi = 0.0;
  double min_i_over_h = 0.0;  // over cells with H > 0
  double max_i_over_h = 0.0;
};

SeriesRow summarize(const Grid& grid, const State& s, std::span<const double> host);

/// Advances one step. Keeps solver operators and warm starts between calls.
class Stepper {
 public:
  explicit Stepper(const Scenario& scenario);

  void advance(State& state);
  const MonitorReport& report() const { return report_; }

 private:
  void clamp(Field& f);
  void check_invariants(const State& before, const State& after);

  const Scenario& sc_;
  StencilOperator vec_op_;
  StencilOperator pred_op_;
  double vector_bound_ = 0.0;
  double predator_bound_ = 0.0;
  Field rhs_i_, rhs_s_, rhs_p_, tmp_;
  MonitorReport report_;
};

/// One step from `state`.
State step(const State& state, const Scenario& scenario);

struct RunSummary {
  State initial;
  State final_state;
  std::vector<SeriesRow> series;
  std::vector<State> snapshots;
  MonitorReport monitors;
};

RunSummary run(const Scenario& scenario);

/// I = H (1 - exp(-beta_VH * cumVi)).
Field closed_form_infected(std::span<const double> host,
                           std::span<const double> cum_vi, double beta_vh);

/// Least-squares decay rate mu of values ~ c exp(-mu t) over [t0, t1].
double fit_decay_rate(std::span<const double> times,
                      std::span<const double> values, double t0, double t1);

}  // namespace refugia
