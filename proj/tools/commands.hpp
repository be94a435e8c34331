#pragma once

#include <cstdint>
#include <string>

#include "config.hpp"

namespace refugia_cli {

struct CommandContext {
  RunConfig config;
  std::string out_dir = "out";
  bool oracle = false;
};

int cmd_simulate(CommandContext& ctx);
int cmd_eig(CommandContext& ctx);
int cmd_sweep_frequency(CommandContext& ctx);
int cmd_sweep_quantity(CommandContext& ctx);
int cmd_bounds(CommandContext& ctx);
int cmd_render(const std::string& snapshot_dir, const std::string& out_dir);
int cmd_make_layout(const std::string& path, std::uint64_t seed, int count, double length);
int cmd_expected_harvest();

}  // namespace refugia_cli
