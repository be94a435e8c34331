#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "handles.hpp"
#include "json.hpp"

namespace refugia_cli {

// Flat grid CSV: ny lines of nx comma-separated values, row j holds y index j.
void write_grid_csv(const std::string& path, const std::vector<double>& values, int nx, int ny);
std::vector<double> read_grid_csv(const std::string& path, int& nx, int& ny);

void write_series_csv(const std::string& path, const std::vector<rf_series_row>& rows);

struct SnapshotEntry {
  double t = 0.0;
  std::string dir;  // relative to the manifest
};

struct Manifest {
  int nx = 0;
  int ny = 0;
  double lx = 0.0;
  double ly = 0.0;
  std::string params_hash;
  std::vector<std::string> fields;
  std::vector<SnapshotEntry> snapshots;
};

extern const char* const kManifestName;

// Writes every snapshot of the run under `dir` plus the manifest.
void write_snapshots(const std::string& dir, const rf_run* run, rf_grid grid,
                     std::uint64_t params_hash);
Manifest read_manifest(const std::string& dir);

// Binary 8-bit portable graymap, top row = largest y. A constant field maps
// to mid-gray.
void write_pgm(const std::string& path, const std::vector<double>& values, int nx, int ny,
               double lo, double hi);
std::vector<unsigned char> read_pgm(const std::string& path, int& width, int& height);

// One image and one caption per field per snapshot. Returns the image count.
int render_snapshots(const std::string& snapshot_dir, const std::string& out_dir);

using Report = std::vector<std::pair<std::string, std::string>>;
void write_report(const std::string& path, const Report& report);
std::string fmt(double v);
std::string hex_hash(std::uint64_t h);

void write_json(const std::string& path, const nlohmann::json& j);
void ensure_dir(const std::string& dir);

}  // namespace refugia_cli
