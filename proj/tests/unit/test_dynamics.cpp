#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "refugia/dynamics.hpp"
#include "refugia/error.hpp"

using namespace refugia;

namespace {

ModelParams base() { return unchecked_preset("extinction").value(); }

CoefficientFields small_fields(int cells, int n = 1, double area = 14400.0) {
  const Grid g = build_grid(cells, cells, 300.0, 300.0);
  return assemble_fields(base(), refuge_frequency_mask(g, n, area));
}

InitialCondition uniform_ic(double vi, double vs) {
  InitialCondition ic;
  ic.kind = InitialCondition::Kind::Uniform;
  ic.vi_scale = vi;
  ic.vs_scale = vs;
  return ic;
}

double sup_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) m = std::max(m, std::abs(a[c] - b[c]));
  return m;
}

double sup(const Field& a) { return *std::max_element(a.begin(), a.end()); }

}  // namespace

TEST_CASE("initial conditions") {
  const CoefficientFields f = small_fields(20);
  const ModelParams p = base();
  const State s = build_initial_state(f, p, uniform_ic(0.01, 0.09));
  for (std::size_t c = 0; c < s.vi.size(); ++c) {
    CHECK(s.vi[c] == doctest::Approx(0.01 * f.r_v[c] / p.s_v));
    CHECK(s.vs[c] == doctest::Approx(0.09 * f.r_v[c] / p.s_v));
    CHECK(s.pred[c] == doctest::Approx(f.r_p[c] / p.s_p));
    CHECK(s.infected[c] == 0.0);
  }
  InitialCondition constant;
  constant.kind = InitialCondition::Kind::Constant;
  constant.vi_scale = 0.2;
  constant.vs_scale = 0.3;
  const State k = build_initial_state(f, p, constant);
  CHECK(sup_abs_diff(k.vi, Field(k.vi.size(), 0.2)) == 0.0);
  CHECK(sup_abs_diff(k.vs, Field(k.vs.size(), 0.3)) == 0.0);

  InitialCondition centered;
  centered.kind = InitialCondition::Kind::CenteredPatch;
  centered.refuge_area = 14400.0;
  const State cs = build_initial_state(f, p, centered);
  CHECK(cs.vi[0] > 0.0);
  CHECK(cs.vi.back() == 0.0);

  InitialCondition bad = uniform_ic(-0.1, 0.0);
  CHECK_THROWS_AS(build_initial_state(f, p, bad), InvalidArgument);
}

TEST_CASE("vector-free state with predators at carrying capacity is a fixed point") {
  const CoefficientFields f = small_fields(16, 2, 3600.0);
  InitialCondition ic;
  for (Scheme scheme : {Scheme::SemiImplicit, Scheme::Explicit}) {
    Scenario sc = make_scenario(f, base(), ic, 10.0, 200);
    sc.scheme = scheme;
    const RunSummary r = run(sc);
    CHECK(sup_abs_diff(r.final_state.pred, r.initial.pred) <= 1e-9 * sup(r.initial.pred));
    CHECK(sup(r.final_state.vi) == 0.0);
    CHECK(sup(r.final_state.vs) == 0.0);
    CHECK(sup(r.final_state.infected) == 0.0);
    CHECK(r.monitors.breaches.empty());
  }
}

TEST_CASE("one explicit step equals a hand-written forward Euler update") {
  const ModelParams p = base();
  const CoefficientFields f = small_fields(8);
  const Grid& g = f.grid();
  const int n = static_cast<int>(g.size());
  std::mt19937_64 rng(17);
  Scenario sc = make_scenario(f, p, uniform_ic(0.0, 0.0), 1.0, 1);
  sc.scheme = Scheme::Explicit;
  sc.dt = 0.5 * explicit_stable_dt(sc);
  sc.horizon = sc.dt;
  const Field vi = oracle::random_field(rng, n, 0.0, 5.0);
  const Field vs = oracle::random_field(rng, n, 0.0, 20.0);
  const Field pr = oracle::random_field(rng, n, 1.0, 10.0);
  const Field inf = oracle::random_field(rng, n, 0.0, 3.0);
  sc.initial.vi = vi;
  sc.initial.vs = vs;
  sc.initial.pred = pr;

  State s = sc.initial;
  s.infected = inf;
  const State next = step(s, sc);

  const oracle::GridDims d{g.nx, g.ny, g.lx, g.ly};
  const Eigen::MatrixXd lap = oracle::laplacian_matrix(d, p.sigma_v);
  const Eigen::MatrixXd pred_op =
      oracle::diffusion_matrix(d, p.sigma_p, f.r_p, oracle::arithmetic);
  auto vec = [](const Field& x) {
    return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  };
  Eigen::VectorXd pr_scaled(n);
  for (int c = 0; c < n; ++c) pr_scaled(c) = pr[c] / f.r_p[c];
  const Eigen::VectorXd lap_vi = lap * vec(vi);
  const Eigen::VectorXd lap_vs = lap * vec(vs);
  const Eigen::VectorXd div_p = pred_op * pr_scaled;
  const double dt = sc.dt;
  for (int c = 0; c < n; ++c) {
    const double v = vi[c] + vs[c];
    const double want_vi = vi[c] + dt * (lap_vi(c) + p.beta_hv * inf[c] * vs[c] -
                                         (p.alpha + p.d_v + p.s_v * v + p.h * pr[c]) * vi[c]);
    const double want_vs =
        vs[c] + dt * (lap_vs(c) - p.beta_hv * inf[c] * vs[c] + p.alpha * vi[c] -
                      (p.d_v + p.s_v * v + p.h * pr[c]) * vs[c] + (f.r_v[c] + p.d_v) * v);
    const double want_p =
        pr[c] + dt * (div_p(c) + p.gamma * p.h * v * pr[c] + f.r_p[c] * pr[c] -
                      p.s_p * pr[c] * pr[c]);
    const double want_i = inf[c] + dt * p.beta_vh * (f.host[c] - inf[c]) * vi[c];
    CHECK(next.vi[c] == doctest::Approx(std::max(want_vi, 0.0)).epsilon(1e-12));
    CHECK(next.vs[c] == doctest::Approx(std::max(want_vs, 0.0)).epsilon(1e-12));
    CHECK(next.pred[c] == doctest::Approx(std::max(want_p, 0.0)).epsilon(1e-12));
    CHECK(next.infected[c] == doctest::Approx(std::clamp(want_i, 0.0, f.host[c])).epsilon(1e-12));
    CHECK(next.cum_vi[c] == doctest::Approx(0.5 * dt * (vi[c] + next.vi[c])).epsilon(1e-12));
  }
  CHECK(next.t == doctest::Approx(dt));
}

TEST_CASE("no aphids means no infection") {
  const CoefficientFields f = small_fields(20);
  Scenario sc = make_scenario(f, base(), InitialCondition{}, 30.0, 300);
  const RunSummary r = run(sc);
  for (const SeriesRow& row : r.series) {
    CHECK(row.sup_i == 0.0);
    CHECK(row.int_v == 0.0);
  }
  CHECK(r.series.size() == 301);
  CHECK(r.series.back().t == doctest::Approx(30.0).epsilon(1e-14));
}

TEST_CASE("infection is monotone and matches its closed form") {
  const CoefficientFields f = small_fields(20);
  double previous_gap = 0.0;
  for (int steps : {200, 400, 800}) {
    Scenario sc = make_scenario(f, base(), uniform_ic(0.05, 0.2), 20.0, steps);
    const RunSummary r = run(sc);
    CHECK(r.monitors.infection_violations == 0);
    for (std::size_t k = 1; k < r.series.size(); ++k) {
      CHECK(r.series[k].int_i >= r.series[k - 1].int_i);
      CHECK(r.series[k].max_i_over_h <= 1.0);
    }
    const Field closed = closed_form_infected(f.host, r.final_state.cum_vi, base().beta_vh);
    const double gap = sup_abs_diff(closed, r.final_state.infected) / sup(f.host);
    CHECK(gap < 1e-2);
    if (previous_gap > 0.0) {
      const double ratio = previous_gap / gap;
      CHECK(ratio > 1.6);
      CHECK(ratio < 2.5);
    }
    previous_gap = gap;
  }
}

TEST_CASE("semi-implicit solution converges at first order") {
  const CoefficientFields f = small_fields(20, 2, 3600.0);
  std::vector<State> finals;
  for (int steps : {100, 200, 400}) {
    Scenario sc = make_scenario(f, base(), uniform_ic(0.02, 0.1), 10.0, steps);
    finals.push_back(run(sc).final_state);
  }
  const double e1 = sup_abs_diff(finals[0].vs, finals[1].vs);
  const double e2 = sup_abs_diff(finals[1].vs, finals[2].vs);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.2));
  const double p1 = sup_abs_diff(finals[0].pred, finals[1].pred);
  const double p2 = sup_abs_diff(finals[1].pred, finals[2].pred);
  CHECK(p1 / p2 == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("explicit and semi-implicit schemes agree at small steps") {
  const CoefficientFields f = small_fields(12);
  Scenario a = make_scenario(f, base(), uniform_ic(0.02, 0.1), 5.0, 1);
  a.scheme = Scheme::Explicit;
  const int steps = static_cast<int>(std::ceil(5.0 / explicit_stable_dt(a))) * 2;
  a.dt = 5.0 / steps;
  Scenario b = a;
  b.scheme = Scheme::SemiImplicit;
  const State ea = run(a).final_state;
  const State eb = run(b).final_state;
  CHECK(sup_abs_diff(ea.vs, eb.vs) <= 1e-2 * sup(eb.vs));
  CHECK(sup_abs_diff(ea.pred, eb.pred) <= 1e-2 * sup(eb.pred));
}

TEST_CASE("explicit scheme refuses steps beyond its stability limit") {
  const CoefficientFields f = small_fields(40);
  Scenario sc = make_scenario(f, base(), uniform_ic(0.01, 0.09), 10.0, 10);
  sc.scheme = Scheme::Explicit;
  const double limit = explicit_stable_dt(sc);
  CHECK(limit < sc.dt);
  CHECK_THROWS_AS(run(sc), InvalidArgument);
  try {
    sc.validate();
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("dt <=") != std::string::npos);
  }
  sc.scheme = Scheme::SemiImplicit;
  CHECK_NOTHROW(sc.validate());
}

TEST_CASE("scenario validation") {
  const CoefficientFields f = small_fields(10);
  CHECK_THROWS_AS(make_scenario(f, base(), InitialCondition{}, 1.0, 0), InvalidArgument);
  Scenario sc = make_scenario(f, base(), InitialCondition{}, 1.0, 4);
  sc.initial.infected[3] = 1.0;
  CHECK_THROWS_AS(sc.validate(), InvalidArgument);
  sc.initial.infected[3] = 0.0;
  sc.initial.vs[2] = -1.0;
  CHECK_THROWS_AS(sc.validate(), InvalidArgument);
  sc.initial.vs[2] = 0.0;
  sc.initial.pred.pop_back();
  CHECK_THROWS_AS(sc.validate(), InvalidArgument);
}

TEST_CASE("monitors warn or abort on heavy clamping") {
  const CoefficientFields f = small_fields(10);
  Scenario sc = make_scenario(f, base(), uniform_ic(0.2, 0.5), 40.0, 2);
  sc.monitors.mode = MonitorMode::Warn;
  const RunSummary warned = run(sc);
  CHECK_FALSE(warned.monitors.breaches.empty());
  CHECK(warned.monitors.clamp_fraction() > sc.monitors.clamp_tol);
  CHECK(warned.monitors.clamp_events > 0);
  sc.monitors.mode = MonitorMode::Abort;
  CHECK_THROWS_AS(run(sc), MonitorError);
}

TEST_CASE("supersolution bounds hold on a routine run") {
  const CoefficientFields f = small_fields(20, 2, 3600.0);
  Scenario sc = make_scenario(f, base(), uniform_ic(0.3, 0.6), 30.0, 600);
  sc.monitors.mode = MonitorMode::Abort;
  const RunSummary r = run(sc);
  CHECK(r.monitors.worst_vector_ratio <= 1.0);
  CHECK(r.monitors.worst_predator_ratio <= 1.0);
}

TEST_CASE("snapshots follow the stride") {
  const CoefficientFields f = small_fields(10);
  Scenario sc = make_scenario(f, base(), uniform_ic(0.01, 0.09), 10.0, 25);
  sc.snapshot_stride = 10;
  const RunSummary r = run(sc);
  REQUIRE(r.snapshots.size() == 4);  // steps 0, 10, 20, 25
  CHECK(r.snapshots[1].t == doctest::Approx(4.0));
  CHECK(r.snapshots.back().t == doctest::Approx(10.0));
}

TEST_CASE("closed form and decay fit") {
  const Field host{2.0, 5.0, 0.0};
  const Field cum{0.0, 1.0, 3.0};
  const Field i = closed_form_infected(host, cum, 0.5);
  CHECK(i[0] == 0.0);
  CHECK(i[1] == doctest::Approx(5.0 * (1.0 - std::exp(-0.5))));
  CHECK(i[2] == 0.0);
  CHECK_THROWS_AS(closed_form_infected(host, Field{1.0}, 0.5), InvalidArgument);
  CHECK_THROWS_AS(closed_form_infected(host, Field{0.0, -1.0, 0.0}, 0.5), InvalidArgument);

  std::vector<double> t, y;
  for (int k = 0; k <= 50; ++k) {
    t.push_back(0.2 * k);
    y.push_back(3.0 * std::exp(-0.7 * t.back()));
  }
  CHECK(fit_decay_rate(t, y, 0.0, 10.0) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(fit_decay_rate(t, y, 5.0, 10.0) == doctest::Approx(0.7).epsilon(1e-12));
  for (double& v : y) v = 1.0 / v;
  CHECK(fit_decay_rate(t, y, 0.0, 10.0) == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK_THROWS_AS(fit_decay_rate(t, y, 20.0, 30.0), InvalidArgument);
  y[3] = 0.0;
  CHECK_THROWS_AS(fit_decay_rate(t, y, 0.0, 10.0), InvalidArgument);
  CHECK_THROWS_AS(fit_decay_rate(t, std::vector<double>(3, 1.0), 0.0, 1.0), InvalidArgument);
}

TEST_CASE("spatially homogeneous data follows the ODE") {
  // Uniform refuge density keeps every coefficient constant in space, so the
  // grid solution must track the ODE for (I, V_i, V_s, P).
  const ModelParams p = base();
  const Grid g = build_grid(4, 4, 300.0, 300.0);
  const CoefficientFields f = assemble_fields(p, refuge_uniform_mask(g, 0.04));
  const double horizon = 20.0;
  oracle::HomogeneousSystem sys{p, f.r_v[0], f.r_p[0], f.host[0]};
  const State init = build_initial_state(f, p, uniform_ic(0.05, 0.3));
  const auto ref = oracle::ode_reference(
      sys, {0.0, init.vi[0], init.vs[0], init.pred[0]}, {0.0, horizon});
  double previous = 0.0;
  for (int steps : {2000, 4000}) {
    Scenario sc = make_scenario(f, p, uniform_ic(0.05, 0.3), horizon, steps);
    const State s = run(sc).final_state;
    const double err = std::max({std::abs(s.infected[5] - ref[1][0]) / f.host[0],
                                 std::abs(s.vi[5] - ref[1][1]) / (f.r_v[0] / p.s_v),
                                 std::abs(s.vs[5] - ref[1][2]) / (f.r_v[0] / p.s_v),
                                 std::abs(s.pred[5] - ref[1][3]) / (f.r_p[0] / p.s_p)});
    CHECK(err < 1e-3);
    if (previous > 0.0) CHECK(previous / err == doctest::Approx(2.0).epsilon(0.15));
    previous = err;
  }
}
