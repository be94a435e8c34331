#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace refugia_cli;

namespace {

struct CommonFlags {
  std::string config;
  std::string out = "out";
  std::string preset;
  std::string scheme;
  std::vector<std::string> settings;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "run config (key = value file or JSON sidecar)");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--preset", f.preset, "parameter preset, replaces the config's parameter source")
      ->check(CLI::IsMember({"extinction", "persistence"}));
  sub->add_option("--scheme", f.scheme, "time stepping scheme")
      ->check(CLI::IsMember({"semi", "explicit"}));
  sub->add_option("--set", f.settings, "extra config entry KEY=VALUE (repeatable)");
}

CommandContext context_from(const CommonFlags& f) {
  CommandContext ctx;
  if (!f.config.empty()) ctx.config = load_config(f.config);
  for (const std::string& s : f.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw CliError(kConfigError, "--set expects KEY=VALUE, got " + s);
    apply_setting(ctx.config, s.substr(0, eq), s.substr(eq + 1));
  }
  if (!f.preset.empty()) {
    ctx.config.preset = f.preset;
    ctx.config.params_path.clear();
  }
  if (!f.scheme.empty()) ctx.config.scheme = f.scheme;
  if (ctx.config.params_path.empty() && ctx.config.preset.empty() &&
      ctx.config.param_values.size() < rf_param_count()) {
    ctx.config.preset = "extinction";
  }
  ctx.out_dir = f.out;
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Refuge-geometry simulations of a host-vector-predator epidemic model"};
  app.require_subcommand(1);

  CommonFlags simulate_f, eig_f, freq_f, quant_f, bounds_f;
  bool oracle = false;
  auto* simulate = app.add_subcommand("simulate", "run one scenario and write its artifacts");
  add_common(simulate, simulate_f);
  auto* eig = app.add_subcommand("eig", "principal eigenvalues and regime verdict");
  add_common(eig, eig_f);
  eig->add_flag("--oracle", oracle, "compare with a dense eigensolver (small grids)");
  auto* freq = app.add_subcommand("sweep-frequency", "harvest versus refuge frequency");
  add_common(freq, freq_f);
  auto* quant = app.add_subcommand("sweep-quantity", "harvest versus uniform refuge density");
  add_common(quant, quant_f);
  auto* bounds = app.add_subcommand("bounds", "trajectory envelope and harvest sandwich checks");
  add_common(bounds, bounds_f);

  std::string snapshot_dir;
  std::string render_out = "frames";
  auto* render = app.add_subcommand("render", "grayscale heatmaps of a snapshot directory");
  render->add_option("snapshots", snapshot_dir, "snapshot directory (holds manifest.txt)")
      ->required();
  render->add_option("--out", render_out, "image directory");

  std::string layout_path;
  std::uint64_t seed = 1;
  int count = 3;
  double length = 300.0;
  auto* layout = app.add_subcommand("make-layout", "write a seeded random patch layout");
  layout->add_option("path", layout_path, "layout file to write")->required();
  layout->add_option("--seed", seed, "random seed");
  layout->add_option("--count", count, "number of patches");
  layout->add_option("--length", length, "domain side length, m");

  auto* expected = app.add_subcommand("expected-harvest", "not implemented; prints why");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  try {
    if (simulate->parsed()) {
      CommandContext ctx = context_from(simulate_f);
      return cmd_simulate(ctx);
    }
    if (eig->parsed()) {
      CommandContext ctx = context_from(eig_f);
      ctx.oracle = oracle;
      return cmd_eig(ctx);
    }
    if (freq->parsed()) {
      CommandContext ctx = context_from(freq_f);
      return cmd_sweep_frequency(ctx);
    }
    if (quant->parsed()) {
      CommandContext ctx = context_from(quant_f);
      return cmd_sweep_quantity(ctx);
    }
    if (bounds->parsed()) {
      CommandContext ctx = context_from(bounds_f);
      return cmd_bounds(ctx);
    }
    if (render->parsed()) return cmd_render(snapshot_dir, render_out);
    if (layout->parsed()) return cmd_make_layout(layout_path, seed, count, length);
    if (expected->parsed()) return cmd_expected_harvest();
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolverError;
  }
  return kOk;
}
