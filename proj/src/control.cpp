#include "refugia/control.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "refugia/analysis.hpp"
#include "refugia/error.hpp"
#include "refugia/spectral.hpp"

namespace refugia {

namespace {

int as_frequency(double v) {
  const double r = std::round(v);
  if (r != v || r < 1.0) {
    throw InvalidArgument("refuge frequencies must be positive integers");
  }
  return static_cast<int>(r);
}

// Runs tasks[0..n) on a bounded pool; each task writes only its own slot.
void run_pool(std::size_t count, int threads,
              const std::function<void(std::size_t)>& task) {
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(count));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) task(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) task(k);
    });
  }
}

SweepRow run_case(const SweepBase& base, const RefugeMask& mask,
                  double axis_value, const std::function<double(const CoefficientFields&)>& lambda) {
  SweepRow row;
  row.axis_value = axis_value;
  try {
    const CoefficientFields fields = assemble_fields(base.params, mask);
    row.lambda1 = lambda(fields);
    InitialCondition ic = base.ic;
    ic.refuge_area = base.refuge_area;
    Scenario sc = make_scenario(fields, base.params, ic, base.horizon, base.steps);
    sc.scheme = base.scheme;
    sc.face_average = base.face_average;
    sc.monitors = base.monitors;
    const RunSummary out = run(sc);
    const HarvestReport h =
        harvest(out.final_state, fields, base.params, late_decay_rate(out));
    row.harvest = h.harvest;
    row.healthy_fraction = h.ratio;
    row.ok = true;
    row.message = "ok";
  } catch (const std::exception& e) {
    row.ok = false;
    row.message = e.what();
  }
  return row;
}

}  // namespace

std::optional<std::size_t> SweepTable::argmax() const {
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (!rows[k].ok) continue;
    if (!best || rows[k].harvest > rows[*best].harvest) best = k;
  }
  return best;
}

void validate_sweep(const SweepSpec& spec) {
  if (spec.values.empty()) throw InvalidArgument("sweep axis is empty");
  spec.base.params.validate();
  if (spec.base.steps < 1 || !(spec.base.horizon > 0.0)) {
    throw InvalidArgument("sweep needs a positive horizon and step count");
  }
  for (double v : spec.values) {
    if (spec.axis == SweepAxis::Frequency) {
      (void)refuge_frequency_mask(spec.base.grid, as_frequency(v),
                                  spec.base.refuge_area);
    } else if (!(v >= 0.0 && v < 1.0)) {
      throw InvalidArgument("refuge quantity must lie in [0, 1)");
    }
  }
  if (spec.base.ic.kind == InitialCondition::Kind::Patches) {
    validate_patch_spec(spec.base.grid, spec.base.ic.layout);
  }
}

SweepTable sweep_frequency(const SweepSpec& spec) {
  if (spec.axis != SweepAxis::Frequency) {
    throw InvalidArgument("sweep_frequency needs a frequency axis");
  }
  validate_sweep(spec);
  SweepTable table{SweepAxis::Frequency, std::vector<SweepRow>(spec.values.size())};
  const SweepBase& base = spec.base;
  run_pool(spec.values.size(), spec.threads, [&](std::size_t k) {
    const int n = as_frequency(spec.values[k]);
    const RefugeMask mask = refuge_frequency_mask(base.grid, n, base.refuge_area);
    table.rows[k] = run_case(base, mask, spec.values[k], [&](const CoefficientFields&) {
      return lambda1_for_frequency(base.params, base.grid, base.refuge_area, n);
    });
  });
  return table;
}

SweepTable sweep_quantity(const SweepSpec& spec) {
  if (spec.axis != SweepAxis::Quantity) {
    throw InvalidArgument("sweep_quantity needs a quantity axis");
  }
  validate_sweep(spec);
  SweepTable table{SweepAxis::Quantity, std::vector<SweepRow>(spec.values.size())};
  const SweepBase& base = spec.base;
  run_pool(spec.values.size(), spec.threads, [&](std::size_t k) {
    const RefugeMask mask = refuge_uniform_mask(base.grid, spec.values[k]);
    table.rows[k] = run_case(base, mask, spec.values[k],
                             [&](const CoefficientFields& fields) {
                               return lambda1_vs(fields, base.params).lambda1;
                             });
  });
  return table;
}

SweepTable run_sweep(const SweepSpec& spec) {
  return spec.axis == SweepAxis::Frequency ? sweep_frequency(spec)
                                           : sweep_quantity(spec);
}

}  // namespace refugia
