#include "refugia/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "refugia/error.hpp"

namespace refugia {

namespace {

constexpr double kRelTol = 1e-12;

bool in_closed_interval(double v, double lo, double hi) {
  return v >= lo && v <= hi;
}

// Membership of a coordinate in the 1-D union of n intervals
// [mL/n, mL/n + side]. A center sitting exactly on an edge (up to rounding)
// counts for the interval it opens, never the one it closes, so squares whose
// edges fall on cell centers still cover exactly side/dx cells.
bool in_lattice_union(double c, double length, int n, double side, double tol) {
  const double period = length / n;
  const int m = std::clamp(static_cast<int>(std::floor((c + tol) / period)), 0, n - 1);
  const double start = m * period;
  return c >= start - tol && c < start + side - tol;
}

}  // namespace

bool Grid::is_square() const {
  return std::abs(lx - ly) <= kRelTol * std::max(lx, ly);
}

Grid build_grid(int nx, int ny, double lx, double ly) {
  if (nx < 2 || ny < 2) {
    throw InvalidArgument("grid needs at least 2 cells per axis, got " +
                          std::to_string(nx) + "x" + std::to_string(ny));
  }
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
    throw InvalidArgument("grid side lengths must be positive and finite");
  }
  Grid g;
  g.nx = nx;
  g.ny = ny;
  g.lx = lx;
  g.ly = ly;
  g.dx = lx / nx;
  g.dy = ly / ny;
  return g;
}

bool RefugeMask::is_indicator() const {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return v == 0.0 || v == 1.0; });
}

RefugeMask refuge_frequency_mask(const Grid& grid, int n, double total_area) {
  if (!grid.is_square()) {
    throw InvalidArgument("frequency refuges need a square domain");
  }
  if (n < 1) {
    throw InvalidArgument("refuge frequency must be >= 1");
  }
  const double length = grid.lx;
  if (!(total_area > 0.0) || total_area > length * length * (1.0 + kRelTol)) {
    throw InvalidArgument("refuge area must lie in (0, L^2]");
  }
  const double side = std::sqrt(total_area) / n;
  const double cell = std::max(grid.dx, grid.dy);
  if (side < cell * (1.0 - kRelTol)) {
    std::ostringstream msg;
    msg << "refuge frequency " << n << " is unresolvable: square side " << side
        << " m is smaller than the cell size " << cell << " m";
    throw InvalidArgument(msg.str());
  }

  const double tol = 1e-9 * cell;
  RefugeMask mask{grid, Field(grid.size(), 0.0)};
  for (int j = 0; j < grid.ny; ++j) {
    const bool in_y = in_lattice_union(grid.y_center(j), length, n, side, tol);
    if (!in_y) continue;
    for (int i = 0; i < grid.nx; ++i) {
      if (in_lattice_union(grid.x_center(i), length, n, side, tol)) {
        mask.values[grid.index(i, j)] = 1.0;
      }
    }
  }
  return mask;
}

RefugeMask refuge_uniform_mask(const Grid& grid, double r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw InvalidArgument("uniform refuge density must lie in [0, 1]");
  }
  return RefugeMask{grid, Field(grid.size(), r)};
}

void validate_patch_spec(const Grid& grid, const PatchSpec& spec) {
  const double tol_x = kRelTol * grid.lx;
  const double tol_y = kRelTol * grid.ly;
  for (std::size_t k = 0; k < spec.rectangles.size(); ++k) {
    const PatchRect& r = spec.rectangles[k];
    const bool finite = std::isfinite(r.x0) && std::isfinite(r.y0) &&
                        std::isfinite(r.width) && std::isfinite(r.height) &&
                        std::isfinite(r.density);
    if (!finite || r.width < 0.0 || r.height < 0.0 || r.density < 0.0) {
      throw InvalidArgument("patch " + std::to_string(k) +
                            " has negative or non-finite entries");
    }
    if (r.x0 < -tol_x || r.y0 < -tol_y || r.x0 + r.width > grid.lx + tol_x ||
        r.y0 + r.height > grid.ly + tol_y) {
      throw InvalidArgument("patch " + std::to_string(k) +
                            " escapes the domain");
    }
  }
}

Field patches_field(const Grid& grid, const PatchSpec& spec) {
  validate_patch_spec(grid, spec);
  Field out(grid.size(), 0.0);
  for (const PatchRect& r : spec.rectangles) {
    for (int j = 0; j < grid.ny; ++j) {
      if (!in_closed_interval(grid.y_center(j), r.y0, r.y0 + r.height)) continue;
      for (int i = 0; i < grid.nx; ++i) {
        if (in_closed_interval(grid.x_center(i), r.x0, r.x0 + r.width)) {
          out[grid.index(i, j)] = r.density;
        }
      }
    }
  }
  return out;
}

double integrate(const Grid& grid, std::span<const double> field) {
  return std::accumulate(field.begin(), field.end(), 0.0) * grid.cell_area();
}

double mask_area(const RefugeMask& mask) {
  return integrate(mask.grid, mask.values);
}

PatchSpec parse_patch_spec(std::istream& in) {
  PatchSpec spec;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    PatchRect r;
    if (!(ls >> r.x0)) continue;  // blank line
    if (!(ls >> r.y0 >> r.width >> r.height >> r.density)) {
      throw ConfigError("patch spec line " + std::to_string(line_no) +
                        ": expected 'x0 y0 width height density'");
    }
    std::string extra;
    if (ls >> extra) {
      throw ConfigError("patch spec line " + std::to_string(line_no) +
                        ": trailing token '" + extra + "'");
    }
    spec.rectangles.push_back(r);
  }
  return spec;
}

PatchSpec load_patch_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open patch spec '" + path + "'");
  return parse_patch_spec(in);
}

void write_patch_spec(std::ostream& out, const PatchSpec& spec) {
  out << "# x0 y0 width height density  (meters)\n";
  const auto old_precision = out.precision(17);
  for (const PatchRect& r : spec.rectangles) {
    out << r.x0 << ' ' << r.y0 << ' ' << r.width << ' ' << r.height << ' '
        << r.density << '\n';
  }
  out.precision(old_precision);
}

PatchSpec centered_patch(double total_area, double density) {
  const double side = std::sqrt(total_area);
  return PatchSpec{{PatchRect{0.0, 0.0, side, side, density}}};
}

}  // namespace refugia
