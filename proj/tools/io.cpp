#include "io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace refugia_cli {

namespace fs = std::filesystem;

const char* const kManifestName = "manifest.txt";

namespace {

struct FieldName {
  rf_field_kind kind;
  const char* name;
};

constexpr FieldName kStateFields[] = {
    {RF_FIELD_INFECTED, "I"}, {RF_FIELD_VI, "Vi"}, {RF_FIELD_VS, "Vs"}, {RF_FIELD_PRED, "P"},
};

[[noreturn]] void io_error(const std::string& msg) { throw CliError(kConfigError, msg); }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) io_error("cannot write '" + path + "'");
  return out;
}

}  // namespace

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex_hash(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) io_error("cannot create directory '" + dir + "': " + ec.message());
}

void write_grid_csv(const std::string& path, const std::vector<double>& values, int nx, int ny) {
  std::ofstream out = open_out(path);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (i > 0) out << ',';
      out << fmt(values[static_cast<size_t>(j) * nx + i]);
    }
    out << '\n';
  }
}

std::vector<double> read_grid_csv(const std::string& path, int& nx, int& ny) {
  std::ifstream in(path);
  if (!in) io_error("cannot read grid '" + path + "'");
  std::vector<double> values;
  std::string line;
  nx = -1;
  ny = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int count = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        values.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        io_error("bad number '" + cell + "' in '" + path + "'");
      }
      ++count;
    }
    if (nx < 0) nx = count;
    if (count != nx) io_error("ragged rows in '" + path + "'");
    ++ny;
  }
  if (ny == 0) io_error("empty grid file '" + path + "'");
  return values;
}

void write_series_csv(const std::string& path, const std::vector<rf_series_row>& rows) {
  std::ofstream out = open_out(path);
  out << "t,supI,supVi,supVs,supP,intI,intV,intP\n";
  for (const rf_series_row& r : rows) {
    out << fmt(r.t) << ',' << fmt(r.sup_i) << ',' << fmt(r.sup_vi) << ',' << fmt(r.sup_vs)
        << ',' << fmt(r.sup_p) << ',' << fmt(r.int_i) << ',' << fmt(r.int_v) << ','
        << fmt(r.int_p) << '\n';
  }
}

void write_snapshots(const std::string& dir, const rf_run* run, rf_grid grid,
                     std::uint64_t params_hash) {
  ensure_dir(dir);
  const size_t cells = static_cast<size_t>(grid.nx) * grid.ny;
  const size_t count = rf_run_snapshot_count(run);
  std::vector<double> buf(cells);
  std::ofstream manifest = open_out((fs::path(dir) / kManifestName).string());
  manifest << "nx = " << grid.nx << "\nny = " << grid.ny << "\nlx = " << fmt(grid.lx)
           << "\nly = " << fmt(grid.ly) << "\nparams_hash = " << hex_hash(params_hash)
           << "\nfields = I,Vi,Vs,P\ncount = " << count << '\n';
  for (size_t k = 0; k < count; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "s%04zu", k);
    const fs::path sub = fs::path(dir) / name;
    ensure_dir(sub.string());
    double t = 0.0;
    for (const FieldName& f : kStateFields) {
      check(rf_run_snapshot(run, k, f.kind, buf.data(), buf.size(), &t), "snapshot");
      write_grid_csv((sub / (std::string(f.name) + ".csv")).string(), buf, grid.nx, grid.ny);
    }
    manifest << "snapshot." << k << ".t = " << fmt(t) << "\nsnapshot." << k
             << ".dir = " << name << '\n';
  }
}

Manifest read_manifest(const std::string& dir) {
  const fs::path path = fs::path(dir) / kManifestName;
  std::ifstream in(path);
  if (!in) io_error("no snapshot manifest in '" + dir + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  Manifest m;
  try {
    m.nx = std::stoi(kv.at("nx"));
    m.ny = std::stoi(kv.at("ny"));
    m.lx = std::stod(kv.at("lx"));
    m.ly = std::stod(kv.at("ly"));
    m.params_hash = kv.at("params_hash");
    std::stringstream fields(kv.at("fields"));
    std::string f;
    while (std::getline(fields, f, ',')) m.fields.push_back(f);
    const int count = std::stoi(kv.at("count"));
    for (int k = 0; k < count; ++k) {
      const std::string key = "snapshot." + std::to_string(k);
      m.snapshots.push_back({std::stod(kv.at(key + ".t")), kv.at(key + ".dir")});
    }
  } catch (const std::exception&) {
    io_error("corrupt snapshot manifest '" + path.string() + "'");
  }
  if (m.nx < 1 || m.ny < 1 || m.snapshots.empty() || m.fields.empty()) {
    io_error("corrupt snapshot manifest '" + path.string() + "'");
  }
  return m;
}

void write_pgm(const std::string& path, const std::vector<double>& values, int nx, int ny,
               double lo, double hi) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_error("cannot write '" + path + "'");
  out << "P5\n" << nx << ' ' << ny << "\n255\n";
  std::vector<unsigned char> row(static_cast<size_t>(nx));
  const double span = hi - lo;
  for (int j = ny - 1; j >= 0; --j) {
    for (int i = 0; i < nx; ++i) {
      const double v = values[static_cast<size_t>(j) * nx + i];
      double level = 128.0;
      if (span > 0.0) level = std::clamp(std::round(255.0 * (v - lo) / span), 0.0, 255.0);
      row[static_cast<size_t>(i)] = static_cast<unsigned char>(level);
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(nx));
  }
}

std::vector<unsigned char> read_pgm(const std::string& path, int& width, int& height) {
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  int maxval = 0;
  if (!(in >> magic >> width >> height >> maxval) || magic != "P5" || maxval != 255) {
    io_error("not an 8-bit binary PGM: '" + path + "'");
  }
  in.get();
  std::vector<unsigned char> px(static_cast<size_t>(width) * height);
  in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (in.gcount() != static_cast<std::streamsize>(px.size())) io_error("truncated PGM '" + path + "'");
  return px;
}

int render_snapshots(const std::string& snapshot_dir, const std::string& out_dir) {
  const Manifest m = read_manifest(snapshot_dir);
  ensure_dir(out_dir);
  int images = 0;
  for (size_t k = 0; k < m.snapshots.size(); ++k) {
    const SnapshotEntry& s = m.snapshots[k];
    for (const std::string& field : m.fields) {
      int nx = 0;
      int ny = 0;
      const auto values = read_grid_csv(
          (fs::path(snapshot_dir) / s.dir / (field + ".csv")).string(), nx, ny);
      if (nx != m.nx || ny != m.ny) {
        io_error("snapshot " + s.dir + "/" + field + " does not match the manifest grid");
      }
      const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      const std::string stem = (fs::path(out_dir) / (s.dir + "_" + field)).string();
      write_pgm(stem + ".pgm", values, nx, ny, *lo, *hi);
      write_report(stem + ".txt", {{"field", field},
                                   {"t", fmt(s.t)},
                                   {"min", fmt(*lo)},
                                   {"max", fmt(*hi)},
                                   {"scale", "linear, black = min, white = max"}});
      ++images;
    }
  }
  return images;
}

void write_report(const std::string& path, const Report& report) {
  std::ofstream out = open_out(path);
  for (const auto& [k, v] : report) out << k << " = " << v << '\n';
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace refugia_cli
