#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>

#include "io.hpp"

namespace refugia_cli {

namespace fs = std::filesystem;

namespace {

struct Setup {
  ParamsPtr params;
  LayoutPtr layout;
  MaskPtr mask;
  FieldsPtr fields;
  std::uint64_t hash = 0;
};

Setup prepare(RunConfig& cfg) {
  Setup s;
  s.params = resolve(cfg);
  s.layout = load_layout(cfg);
  s.mask = build_mask(cfg);
  rf_fields* raw = nullptr;
  check(rf_fields_assemble(s.params.get(), s.mask.get(), &raw), "coefficient fields");
  s.fields.reset(raw);
  check(rf_params_hash(s.params.get(), &s.hash), "parameter hash");
  return s;
}

double param(const rf_params* p, const char* key) {
  double v = 0.0;
  check(rf_params_get(p, key, &v), "parameter");
  return v;
}

std::string path_in(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

void write_sidecar(const CommandContext& ctx, const rf_params* params, const char* command,
                   const char* name) {
  nlohmann::json j = to_json(ctx.config, params);
  j["command"] = command;
  write_json(path_in(ctx.out_dir, name), j);
}

RunPtr simulate(const RunConfig& cfg, const Setup& s) {
  const rf_initial ic = initial_of(cfg, s.layout.get());
  const rf_sim_options opts = options_of(cfg);
  rf_run* raw = nullptr;
  check(rf_simulate(s.fields.get(), s.params.get(), &ic, &opts, &raw), "simulation");
  return RunPtr(raw);
}

std::vector<rf_series_row> series_of(const rf_run* run) {
  std::vector<rf_series_row> rows(rf_run_series_count(run));
  check(rf_run_series(run, rows.data(), rows.size()), "time series");
  return rows;
}

std::vector<double> snapshot_field(const rf_run* run, const RunConfig& cfg, size_t index,
                                   rf_field_kind kind) {
  std::vector<double> buf(static_cast<size_t>(cfg.nx) * cfg.ny);
  check(rf_run_snapshot(run, index, kind, buf.data(), buf.size(), nullptr), "snapshot");
  return buf;
}

// Well-preparedness inputs of the bounds, read off the initial state.
struct InitialStats {
  double v0_sup = 0.0;
  double vi0_inf = 0.0;
  double p0_dev = 0.0;
};

InitialStats initial_stats(const rf_run* run, const Setup& s, const RunConfig& cfg) {
  const auto vi = snapshot_field(run, cfg, 0, RF_FIELD_VI);
  const auto vs = snapshot_field(run, cfg, 0, RF_FIELD_VS);
  const auto pr = snapshot_field(run, cfg, 0, RF_FIELD_PRED);
  std::vector<double> rp(vi.size());
  check(rf_fields_get(s.fields.get(), RF_FIELD_RP, rp.data(), rp.size()), "r_P");
  const double s_p = param(s.params.get(), "s_P");
  InitialStats st;
  st.vi0_inf = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < vi.size(); ++c) {
    st.v0_sup = std::max(st.v0_sup, vi[c] + vs[c]);
    st.vi0_inf = std::min(st.vi0_inf, vi[c]);
    st.p0_dev = std::max(st.p0_dev, std::abs(pr[c] - rp[c] / s_p));
  }
  return st;
}

void add_eigen(Report& r, const rf_eigen_summary& e) {
  r.emplace_back("lambda1_vs", fmt(e.lambda_vs));
  r.emplace_back("lambda1_vi", fmt(e.lambda_vi));
  r.emplace_back("lambda1_p", fmt(e.lambda_p));
  r.emplace_back("regime", rf_regime_name(e.regime));
}

int sweep(CommandContext& ctx, rf_axis axis) {
  RunConfig& cfg = ctx.config;
  ParamsPtr params = resolve(cfg);
  LayoutPtr layout = load_layout(cfg);
  if (cfg.sweep_values.empty()) {
    cfg.sweep_values = axis == RF_AXIS_FREQUENCY
                           ? std::vector<double>{1, 2, 4, 8, 16}
                           : std::vector<double>{0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  }
  rf_sweep_spec spec{};
  spec.params = params.get();
  spec.grid = grid_of(cfg);
  spec.refuge_area = cfg.refuge_area;
  spec.initial = initial_of(cfg, layout.get());
  spec.options = options_of(cfg);
  spec.axis = axis;
  spec.values = cfg.sweep_values.data();
  spec.count = cfg.sweep_values.size();
  spec.threads = cfg.threads;
  std::vector<rf_sweep_row> rows(spec.count);
  check(rf_sweep(&spec, rows.data()), "sweep");

  ensure_dir(ctx.out_dir);
  {
    std::ofstream out(path_in(ctx.out_dir, "sweep.csv"));
    if (!out) throw CliError(kConfigError, "cannot write sweep table");
    out << "axis_value,lambda1,harvest,healthy_fraction,status\n";
    for (const rf_sweep_row& r : rows) {
      out << fmt(r.axis_value) << ',' << fmt(r.lambda1) << ',' << fmt(r.harvest) << ','
          << fmt(r.healthy_fraction) << ',' << (r.ok ? "ok" : "failed") << '\n';
    }
  }
  if (axis == RF_AXIS_FREQUENCY) {
    std::vector<int> ns;
    for (double v : cfg.sweep_values) ns.push_back(static_cast<int>(v));
    std::vector<double> lambda(ns.size());
    check(rf_frequency_curve(params.get(), spec.grid, cfg.refuge_area, ns.data(), ns.size(),
                             lambda.data()),
          "frequency curve");
    std::ofstream out(path_in(ctx.out_dir, "frequency_curve.csv"));
    out << "n,lambda1\n";
    for (size_t k = 0; k < ns.size(); ++k) out << ns[k] << ',' << fmt(lambda[k]) << '\n';
  }

  nlohmann::json j = to_json(cfg, params.get());
  j["command"] = axis == RF_AXIS_FREQUENCY ? "sweep-frequency" : "sweep-quantity";
  nlohmann::json sidecar;
  sidecar["config"] = j;
  int best = -1;
  nlohmann::json failures = nlohmann::json::array();
  for (size_t k = 0; k < rows.size(); ++k) {
    if (!rows[k].ok) {
      failures.push_back({{"axis_value", rows[k].axis_value}, {"message", rows[k].message}});
      continue;
    }
    if (best < 0 || rows[k].harvest > rows[static_cast<size_t>(best)].harvest) {
      best = static_cast<int>(k);
    }
  }
  sidecar["argmax_axis_value"] =
      best >= 0 ? nlohmann::json(rows[static_cast<size_t>(best)].axis_value) : nlohmann::json();
  sidecar["failures"] = failures;
  write_json(path_in(ctx.out_dir, "sweep.json"), sidecar);
  // A second copy holding only the config, so it can be fed back with --config.
  write_json(path_in(ctx.out_dir, "config.json"), j);

  for (const rf_sweep_row& r : rows) {
    std::cout << "axis=" << r.axis_value << " lambda1=" << r.lambda1
              << " harvest=" << r.harvest << " healthy=" << r.healthy_fraction
              << (r.ok ? "" : std::string(" FAILED: ") + r.message) << '\n';
  }
  if (best >= 0) std::cout << "argmax=" << rows[static_cast<size_t>(best)].axis_value << '\n';
  return failures.empty() ? kOk : kSolverError;
}

}  // namespace

int cmd_simulate(CommandContext& ctx) {
  RunConfig& cfg = ctx.config;
  Setup s = prepare(cfg);
  RunPtr run = simulate(cfg, s);
  ensure_dir(ctx.out_dir);

  write_series_csv(path_in(ctx.out_dir, "series.csv"), series_of(run.get()));
  write_snapshots(path_in(ctx.out_dir, "snapshots"), run.get(), grid_of(cfg), s.hash);

  rf_harvest h{};
  check(rf_run_harvest(run.get(), &h), "harvest");
  rf_eigen_summary e{};
  check(rf_eigen(s.fields.get(), s.params.get(),
                 cfg.face_average == "harmonic" ? RF_FACE_HARMONIC : RF_FACE_ARITHMETIC, &e),
        "eigenvalues");
  rf_monitor_report m{};
  check(rf_run_monitors(run.get(), &m), "monitors");
  double gap = 0.0;
  check(rf_run_closed_form_gap(run.get(), &gap), "closed form");

  Report r;
  r.emplace_back("harvest", fmt(h.harvest));
  r.emplace_back("total_hosts", fmt(h.total_hosts));
  r.emplace_back("healthy_fraction", fmt(h.ratio));
  r.emplace_back("decay_rate", fmt(h.decay_rate));
  r.emplace_back("tail_bound", fmt(h.tail_bound));
  add_eigen(r, e);
  r.emplace_back("clamp_fraction", fmt(m.clamp_fraction));
  r.emplace_back("worst_vector_ratio", fmt(m.worst_vector_ratio));
  r.emplace_back("worst_predator_ratio", fmt(m.worst_predator_ratio));
  r.emplace_back("infection_violations", std::to_string(m.infection_violations));
  r.emplace_back("monitor_breaches", std::to_string(m.breach_count));
  r.emplace_back("closed_form_gap", fmt(gap));
  if (e.regime == RF_REGIME_PERSISTENCE) {
    rf_persistence v{};
    check(rf_run_persistence(run.get(), cfg.persist_tol, cfg.burn_in, cfg.gap_threshold, &v),
          "persistence check");
    r.emplace_back("persistence", v.applicable ? (v.passed ? "pass" : "fail") : "n/a");
    r.emplace_back("persistence_message", v.message);
  }
  write_report(path_in(ctx.out_dir, "report.txt"), r);
  write_sidecar(ctx, s.params.get(), "simulate", "config.json");

  for (const auto& [k, v] : r) std::cout << k << " = " << v << '\n';
  for (size_t k = 0; k < m.breach_count; ++k) {
    std::cerr << "monitor: " << rf_run_breach(run.get(), k) << '\n';
  }
  return kOk;
}

int cmd_eig(CommandContext& ctx) {
  RunConfig& cfg = ctx.config;
  Setup s = prepare(cfg);
  rf_eigen_summary e{};
  check(rf_eigen(s.fields.get(), s.params.get(),
                 cfg.face_average == "harmonic" ? RF_FACE_HARMONIC : RF_FACE_ARITHMETIC, &e),
        "eigenvalues");
  ensure_dir(ctx.out_dir);
  std::ofstream out(path_in(ctx.out_dir, "eig.csv"));
  out << "lambda1_vs,lambda1_vi,lambda1_p,regime";
  if (ctx.oracle) out << ",dense_lambda1_vs,dense_lambda1_vi,rel_diff_vs,rel_diff_vi";
  out << '\n' << fmt(e.lambda_vs) << ',' << fmt(e.lambda_vi) << ',' << fmt(e.lambda_p) << ','
      << rf_regime_name(e.regime);
  std::cout << "lambda1_vs = " << fmt(e.lambda_vs) << "\nlambda1_vi = " << fmt(e.lambda_vi)
            << "\nlambda1_p = " << fmt(e.lambda_p) << "\nregime = " << rf_regime_name(e.regime)
            << '\n';
  if (ctx.oracle) {
    double dvs = 0.0;
    double dvi = 0.0;
    check(rf_eigen_dense(s.fields.get(), s.params.get(), &dvs, &dvi), "dense oracle");
    const double rvs = std::abs(dvs - e.lambda_vs) / std::max(1.0, std::abs(dvs));
    const double rvi = std::abs(dvi - e.lambda_vi) / std::max(1.0, std::abs(dvi));
    out << ',' << fmt(dvs) << ',' << fmt(dvi) << ',' << fmt(rvs) << ',' << fmt(rvi);
    std::cout << "dense_lambda1_vs = " << fmt(dvs) << "\ndense_lambda1_vi = " << fmt(dvi)
              << "\nrel_diff_vs = " << fmt(rvs) << "\nrel_diff_vi = " << fmt(rvi) << '\n';
  }
  out << '\n';
  write_sidecar(ctx, s.params.get(), "eig", "config.json");
  return kOk;
}

int cmd_sweep_frequency(CommandContext& ctx) { return sweep(ctx, RF_AXIS_FREQUENCY); }

int cmd_sweep_quantity(CommandContext& ctx) { return sweep(ctx, RF_AXIS_QUANTITY); }

int cmd_bounds(CommandContext& ctx) {
  RunConfig& cfg = ctx.config;
  Setup s = prepare(cfg);
  RunPtr run = simulate(cfg, s);
  const InitialStats st = initial_stats(run.get(), s, cfg);

  rf_harvest h{};
  check(rf_run_harvest(run.get(), &h), "harvest");
  rf_envelope env{};
  check(rf_run_envelope(run.get(), cfg.eps, cfg.slack, &env), "envelope");

  Report r;
  r.emplace_back("v0_sup", fmt(st.v0_sup));
  r.emplace_back("vi0_inf", fmt(st.vi0_inf));
  r.emplace_back("p0_deviation", fmt(st.p0_dev));
  r.emplace_back("healthy_fraction", fmt(h.ratio));
  r.emplace_back("tail_fraction", fmt(h.total_hosts > 0 ? h.tail_bound / h.total_hosts : 0.0));
  rf_bounds b{};
  const rf_status bs = rf_harvest_sandwich(s.fields.get(), s.params.get(), st.v0_sup,
                                           st.vi0_inf, cfg.eps, st.p0_dev, &b);
  if (bs == RF_OK) {
    const double tail = h.total_hosts > 0 ? h.tail_bound / h.total_hosts : 0.0;
    const bool inside = h.ratio >= b.lower - tail && h.ratio <= b.upper + tail;
    r.emplace_back("eps", fmt(b.eps));
    r.emplace_back("lambda1_vs", fmt(b.lambda_vs));
    r.emplace_back("lambda1_vi", fmt(b.lambda_vi));
    r.emplace_back("max_phi_s", fmt(b.max_phi_s));
    r.emplace_back("min_phi_i", fmt(b.min_phi_i));
    r.emplace_back("sandwich_lower", fmt(b.lower));
    r.emplace_back("sandwich_upper", fmt(b.upper));
    r.emplace_back("sandwich", inside ? "holds" : "violated");
  } else if (bs == RF_ERR_ARGUMENT) {
    r.emplace_back("sandwich", std::string("not applicable: ") + rf_last_error());
  } else {
    check(bs, "harvest sandwich");
  }
  r.emplace_back("envelope", env.applicable ? (env.holds ? "holds" : "violated")
                                            : "not applicable");
  r.emplace_back("envelope_message", env.message);
  if (env.applicable) {
    r.emplace_back("envelope_worst_v", fmt(env.worst_v));
    r.emplace_back("envelope_worst_i_upper", fmt(env.worst_i_upper));
    r.emplace_back("envelope_worst_i_lower", fmt(env.worst_i_lower));
    r.emplace_back("envelope_slack", fmt(env.slack));
  }
  ensure_dir(ctx.out_dir);
  write_report(path_in(ctx.out_dir, "bounds.txt"), r);
  write_sidecar(ctx, s.params.get(), "bounds", "config.json");
  for (const auto& [k, v] : r) std::cout << k << " = " << v << '\n';
  return kOk;
}

int cmd_render(const std::string& snapshot_dir, const std::string& out_dir) {
  const int n = render_snapshots(snapshot_dir, out_dir);
  std::cout << "wrote " << n << " images to " << out_dir << '\n';
  return kOk;
}

int cmd_make_layout(const std::string& path, std::uint64_t seed, int count, double length) {
  if (count < 1 || !(length > 0.0)) {
    throw CliError(kConfigError, "need count >= 1 and a positive side length");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> size(0.05 * length, 0.25 * length);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::ofstream out(path);
  if (!out) throw CliError(kConfigError, "cannot write '" + path + "'");
  out << "# x0 y0 width height density (seed " << seed << ")\n";
  for (int k = 0; k < count; ++k) {
    const double w = size(rng);
    const double x0 = unit(rng) * (length - w);
    const double y0 = unit(rng) * (length - w);
    out << fmt(x0) << ' ' << fmt(y0) << ' ' << fmt(w) << ' ' << fmt(w) << " 1\n";
  }
  return kOk;
}

int cmd_expected_harvest() {
  std::cout << "expected-harvest: the harvest averaged over random initial patch layouts is "
               "not implemented.\nUse make-layout with several seeds and sweep-frequency "
               "on each layout instead.\n";
  return kOk;
}

}  // namespace refugia_cli
