#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace refugia {

// Cell-centered scalar field, row-major with x fastest: index = j * nx + i.
using Field = std::vector<double>;

/// Uniform cell-centered discretization of [0, lx] x [0, ly].
struct Grid {
  int nx = 0;
  int ny = 0;
  double lx = 0.0;
  double ly = 0.0;
  double dx = 0.0;
  double dy = 0.0;

  std::size_t size() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) +
           static_cast<std::size_t>(i);
  }
  double cell_area() const { return dx * dy; }
  double area() const { return lx * ly; }
  double x_center(int i) const { return (i + 0.5) * dx; }
  double y_center(int j) const { return (j + 0.5) * dy; }
  bool is_square() const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

Grid build_grid(int nx, int ny, double lx, double ly);

/// Per-cell refuge density in [0, 1].
struct RefugeMask {
  Grid grid;
  Field values;

  bool is_indicator() const;
};

struct PatchRect {
  double x0 = 0.0;
  double y0 = 0.0;
  double width = 0.0;
  double height = 0.0;
  double density = 0.0;
};

/// Explicit rectangle layout used for patchy initial conditions.
struct PatchSpec {
  std::vector<PatchRect> rectangles;
};

/// Indicator of the uniformly distributed refuge family: n^2 squares of side
/// sqrt(total_area)/n anchored at (mL/n, m'L/n), sampled at cell centers.
RefugeMask refuge_frequency_mask(const Grid& grid, int n, double total_area);

RefugeMask refuge_uniform_mask(const Grid& grid, double r);

/// Density of the last listed rectangle containing each cell center, zero
/// outside every rectangle.
Field patches_field(const Grid& grid, const PatchSpec& spec);

double mask_area(const RefugeMask& mask);

/// Sum of values times cell area.
double integrate(const Grid& grid, std::span<const double> field);

// PatchSpec text block: one rectangle per line, "x0 y0 width height density"
// in meters. Blank lines and '#' comments are ignored.
PatchSpec parse_patch_spec(std::istream& in);
PatchSpec load_patch_spec(const std::string& path);
void write_patch_spec(std::ostream& out, const PatchSpec& spec);

/// Single rectangle equal to the frequency-1 refuge square.
PatchSpec centered_patch(double total_area, double density = 1.0);

void validate_patch_spec(const Grid& grid, const PatchSpec& spec);

}  // namespace refugia
