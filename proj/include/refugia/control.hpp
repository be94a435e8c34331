#pragma once

#include <optional>
#include <string>
#include <vector>

#include "refugia/coefficients.hpp"
#include "refugia/dynamics.hpp"
#include "refugia/geometry.hpp"

namespace refugia {

/// Everything shared by the scenarios of one sweep.
struct SweepBase {
  ModelParams params;
  Grid grid;
  double refuge_area = 0.0;  // total area of the frequency refuges
  InitialCondition ic;
  double horizon = 0.0;
  int steps = 0;
  Scheme scheme = Scheme::SemiImplicit;
  FaceAverage face_average = FaceAverage::Arithmetic;
  MonitorConfig monitors;
};

enum class SweepAxis { Frequency, Quantity };

struct SweepSpec {
  SweepBase base;
  SweepAxis axis = SweepAxis::Frequency;
  std::vector<double> values;  // frequencies n, or uniform refuge densities r
  int threads = 0;             // 0: hardware concurrency
};

struct SweepRow {
  double axis_value = 0.0;
  double lambda1 = 0.0;
  double harvest = 0.0;
  double healthy_fraction = 0.0;
  bool ok = false;
  std::string message;
};

struct SweepTable {
  SweepAxis axis = SweepAxis::Frequency;
  std::vector<SweepRow> rows;  // one per axis value, in axis order

  /// Row index with the largest harvest among successful rows.
  std::optional<std::size_t> argmax() const;
};

/// Throws InvalidArgument for an empty axis or values invalid on the grid.
void validate_sweep(const SweepSpec& spec);

SweepTable sweep_frequency(const SweepSpec& spec);
SweepTable sweep_quantity(const SweepSpec& spec);
SweepTable run_sweep(const SweepSpec& spec);

}  // namespace refugia
