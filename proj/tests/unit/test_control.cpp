#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "refugia/analysis.hpp"
#include "refugia/control.hpp"
#include "refugia/error.hpp"
#include "refugia/spectral.hpp"

using namespace refugia;

namespace {

SweepSpec frequency_spec(std::vector<double> values, int threads) {
  SweepSpec spec;
  spec.base.params = unchecked_preset("extinction").value();
  spec.base.grid = build_grid(20, 20, 300.0, 300.0);
  spec.base.refuge_area = 14400.0;
  spec.base.ic.kind = InitialCondition::Kind::Uniform;
  spec.base.horizon = 20.0;
  spec.base.steps = 100;
  spec.axis = SweepAxis::Frequency;
  spec.values = std::move(values);
  spec.threads = threads;
  return spec;
}

}  // namespace

TEST_CASE("frequency sweep fills every row in axis order") {
  const SweepSpec spec = frequency_spec({4, 1, 2}, 2);
  const SweepTable t = run_sweep(spec);
  CHECK(t.axis == SweepAxis::Frequency);
  REQUIRE(t.rows.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(t.rows[k].axis_value == spec.values[k]);
    CHECK(t.rows[k].ok);
    CHECK(t.rows[k].message == "ok");
    CHECK(t.rows[k].harvest > 0.0);
    CHECK(t.rows[k].healthy_fraction > 0.0);
    CHECK(t.rows[k].healthy_fraction <= 1.0);
  }
  REQUIRE(t.argmax().has_value());
}

TEST_CASE("sweep results do not depend on the thread count") {
  const SweepTable serial = run_sweep(frequency_spec({1, 2, 4}, 1));
  const SweepTable parallel = run_sweep(frequency_spec({1, 2, 4}, 3));
  REQUIRE(serial.rows.size() == parallel.rows.size());
  for (std::size_t k = 0; k < serial.rows.size(); ++k) {
    CHECK(serial.rows[k].lambda1 == parallel.rows[k].lambda1);
    CHECK(serial.rows[k].harvest == parallel.rows[k].harvest);
    CHECK(serial.rows[k].healthy_fraction == parallel.rows[k].healthy_fraction);
  }
}

TEST_CASE("lambda column agrees with the frequency curve") {
  const SweepSpec spec = frequency_spec({1, 2, 4}, 0);
  const SweepTable t = run_sweep(spec);
  const auto curve =
      frequency_curve(spec.base.params, spec.base.grid, spec.base.refuge_area, {1, 2, 4});
  for (std::size_t k = 0; k < 3; ++k) CHECK(t.rows[k].lambda1 == curve[k].second);
}

TEST_CASE("quantity sweep") {
  SweepSpec spec = frequency_spec({0.0, 0.3, 0.6}, 0);
  spec.axis = SweepAxis::Quantity;
  spec.base.ic.vs_scale = 0.0;
  const SweepTable t = run_sweep(spec);
  REQUIRE(t.rows.size() == 3);
  for (const SweepRow& row : t.rows) {
    CHECK(row.ok);
    CHECK(row.lambda1 == doctest::Approx(homogenized_limit(spec.base.params, row.axis_value))
                             .epsilon(1e-9));
  }
  // Uniform refuges remove hosts; a field with no vectors keeps 1 - r of them.
  spec.base.ic.kind = InitialCondition::Kind::None;
  const SweepTable empty = run_sweep(spec);
  for (const SweepRow& row : empty.rows) {
    CHECK(row.harvest == doctest::Approx(spec.base.params.h_field * 90000.0 * (1 - row.axis_value)));
  }
  CHECK(*empty.argmax() == 0);
}

TEST_CASE("sweep validation") {
  CHECK_THROWS_AS(run_sweep(frequency_spec({}, 0)), InvalidArgument);
  CHECK_THROWS_AS(run_sweep(frequency_spec({1, 32}, 0)), InvalidArgument);
  CHECK_THROWS_AS(run_sweep(frequency_spec({1.5}, 0)), InvalidArgument);
  CHECK_THROWS_AS(run_sweep(frequency_spec({0}, 0)), InvalidArgument);
  SweepSpec q = frequency_spec({0.2, 1.0}, 0);
  q.axis = SweepAxis::Quantity;
  CHECK_THROWS_AS(run_sweep(q), InvalidArgument);
  q.values = {-0.1};
  CHECK_THROWS_AS(run_sweep(q), InvalidArgument);
  SweepSpec mismatch = frequency_spec({1}, 0);
  CHECK_THROWS_AS(sweep_quantity(mismatch), InvalidArgument);
  SweepSpec no_steps = frequency_spec({1}, 0);
  no_steps.base.steps = 0;
  CHECK_THROWS_AS(run_sweep(no_steps), InvalidArgument);
}

TEST_CASE("failed scenarios are reported per row") {
  SweepSpec spec = frequency_spec({1, 2}, 0);
  spec.base.ic.vi_scale = 0.2;
  spec.base.ic.vs_scale = 0.5;
  spec.base.horizon = 40.0;
  spec.base.steps = 2;
  spec.base.monitors.mode = MonitorMode::Abort;
  const SweepTable t = run_sweep(spec);
  for (const SweepRow& row : t.rows) {
    CHECK_FALSE(row.ok);
    CHECK(row.message.find("clamped") != std::string::npos);
  }
  CHECK_FALSE(t.argmax().has_value());
}
