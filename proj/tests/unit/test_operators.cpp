#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <random>

#include "oracles.hpp"
#include "refugia/error.hpp"
#include "refugia/operators.hpp"

using namespace refugia;

namespace {

Eigen::VectorXd as_vec(const Field& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
}

oracle::GridDims dims(const Grid& g) { return {g.nx, g.ny, g.lx, g.ly}; }

double sum(const Field& f) {
  double s = 0.0;
  for (double v : f) s += v;
  return s;
}

}  // namespace

TEST_CASE("laplacian conserves mass and kills constants") {
  std::mt19937_64 rng(7);
  const Grid g = build_grid(9, 6, 30.0, 20.0);
  const Field f = oracle::random_field(rng, static_cast<int>(g.size()), -1.0, 3.0);
  const Field lf = laplacian_apply(g, f, 2.5);
  double scale = 0.0;
  for (double v : lf) scale = std::max(scale, std::abs(v));
  CHECK(std::abs(sum(lf)) <= 1e-12 * scale * g.size());
  const Field ones(g.size(), 4.0);
  for (double v : laplacian_apply(g, ones, 2.5)) CHECK(v == 0.0);
}

TEST_CASE("weighted operator conserves mass") {
  std::mt19937_64 rng(8);
  const Grid g = build_grid(7, 7, 10.0, 10.0);
  const Field w = oracle::random_field(rng, 49, 0.1, 2.0);
  const Field f = oracle::random_field(rng, 49, 0.0, 1.0);
  for (FaceAverage avg : {FaceAverage::Arithmetic, FaceAverage::Harmonic}) {
    const Field out = StencilOperator::weighted(g, 1.3, w, avg).apply(f);
    CHECK(std::abs(sum(out)) < 1e-12);
  }
}

TEST_CASE("matrix-free application matches the dense assembly") {
  std::mt19937_64 rng(11);
  const Grid g = build_grid(6, 5, 12.0, 7.5);
  const int n = static_cast<int>(g.size());
  const Field f = oracle::random_field(rng, n, -1.0, 1.0);
  const Field w = oracle::random_field(rng, n, 0.2, 5.0);

  SUBCASE("laplacian") {
    const Eigen::MatrixXd a = oracle::laplacian_matrix(dims(g), 3.0);
    const Eigen::VectorXd want = a * as_vec(f);
    const Field got = laplacian_apply(g, f, 3.0);
    CHECK((as_vec(got) - want).norm() <= 1e-12 * want.norm());
  }
  SUBCASE("arithmetic faces") {
    const Eigen::MatrixXd a = oracle::diffusion_matrix(dims(g), 0.7, w, oracle::arithmetic);
    const Eigen::VectorXd want = a * as_vec(f);
    const Field got = StencilOperator::weighted(g, 0.7, w).apply(f);
    CHECK((as_vec(got) - want).norm() <= 1e-12 * want.norm());
  }
  SUBCASE("harmonic faces") {
    const Eigen::MatrixXd a = oracle::diffusion_matrix(dims(g), 0.7, w, oracle::harmonic);
    const Eigen::VectorXd want = a * as_vec(f);
    const Field got = StencilOperator::weighted(g, 0.7, w, FaceAverage::Harmonic).apply(f);
    CHECK((as_vec(got) - want).norm() <= 1e-12 * want.norm());
  }
  SUBCASE("ideal free form") {
    Field scaled(f.size());
    for (std::size_t c = 0; c < f.size(); ++c) scaled[c] = f[c] / w[c];
    const Eigen::MatrixXd a = oracle::diffusion_matrix(dims(g), 0.7, w, oracle::arithmetic);
    const Eigen::VectorXd want = a * as_vec(scaled);
    const Field got = ideal_free_apply(g, f, w, 0.7);
    CHECK((as_vec(got) - want).norm() <= 1e-12 * want.norm());
    // P proportional to r_P is a steady state.
    for (double v : ideal_free_apply(g, w, w, 0.7)) CHECK(std::abs(v) < 1e-12);
  }
}

TEST_CASE("operator is symmetric and negative semi-definite") {
  std::mt19937_64 rng(3);
  const Grid g = build_grid(5, 8, 5.0, 16.0);
  const int n = static_cast<int>(g.size());
  const Field w = oracle::random_field(rng, n, 0.5, 1.5);
  const StencilOperator op = StencilOperator::weighted(g, 2.0, w, FaceAverage::Harmonic);
  for (int trial = 0; trial < 20; ++trial) {
    const Field u = oracle::random_field(rng, n, -1.0, 1.0);
    const Field v = oracle::random_field(rng, n, -1.0, 1.0);
    const double uav = dot(u, op.apply(v));
    const double vau = dot(v, op.apply(u));
    CHECK(uav == doctest::Approx(vau).epsilon(1e-12));
    CHECK(dot(u, op.apply(u)) <= 1e-14);
  }
  const Field d = op.diagonal();
  for (double v : d) CHECK(v < 0.0);
  // Gershgorin bound dominates the actual spectral radius.
  Eigen::MatrixXd a(n, n);
  Field unit(n, 0.0);
  for (int c = 0; c < n; ++c) {
    unit[c] = 1.0;
    a.col(c) = as_vec(op.apply(unit));
    unit[c] = 0.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  CHECK(-es.eigenvalues().minCoeff() <= op.spectral_bound() * (1.0 + 1e-12));
  CHECK(es.eigenvalues().maxCoeff() <= 1e-10);
  for (int c = 0; c < n; ++c) CHECK(a(c, c) == doctest::Approx(d[c]));
}

TEST_CASE("implicit solve agrees with a dense factorization") {
  std::mt19937_64 rng(21);
  const Grid g = build_grid(8, 8, 40.0, 40.0);
  const int n = static_cast<int>(g.size());
  const Field w = oracle::random_field(rng, n, 0.3, 2.0);
  const Field mass = oracle::random_field(rng, n, 0.5, 1.5);
  const Field rhs = oracle::random_field(rng, n, 0.0, 10.0);
  const double dt = 0.8;
  const StencilOperator op = StencilOperator::weighted(g, 25.0, w);

  Eigen::MatrixXd m = -dt * oracle::diffusion_matrix(dims(g), 25.0, w, oracle::arithmetic);
  for (int c = 0; c < n; ++c) m(c, c) += mass[c];
  const Eigen::VectorXd want = m.ldlt().solve(as_vec(rhs));

  for (bool jacobi : {false, true}) {
    SolveOptions opts;
    opts.jacobi = jacobi;
    opts.rel_tol = 1e-13;
    SolveStats stats;
    const Field got = implicit_diffusion_solve(rhs, op, dt, opts, mass, {}, &stats);
    CHECK((as_vec(got) - want).norm() <= 1e-10 * want.norm());
    CHECK(stats.iterations > 0);
    CHECK(stats.rel_residual <= 1e-13);
  }
  // Identity mass path.
  const Field plain = implicit_diffusion_solve(rhs, op, dt);
  Eigen::MatrixXd m1 = -dt * oracle::diffusion_matrix(dims(g), 25.0, w, oracle::arithmetic);
  m1.diagonal().array() += 1.0;
  CHECK((as_vec(plain) - m1.ldlt().solve(as_vec(rhs))).norm() <= 1e-8 * as_vec(rhs).norm());
  CHECK(sum(plain) == doctest::Approx(sum(rhs)).epsilon(1e-9));
}

TEST_CASE("solver failures are reported") {
  const Grid g = build_grid(16, 16, 16.0, 16.0);
  const StencilOperator op = StencilOperator::laplacian(g, 50.0);
  std::mt19937_64 rng(5);
  const Field rhs = oracle::random_field(rng, 256, -1.0, 1.0);

  SolveOptions starved;
  starved.max_iter = 2;
  starved.rel_tol = 1e-14;
  CHECK_THROWS_AS(implicit_diffusion_solve(rhs, op, 1.0, starved), SolverError);
  CHECK_THROWS_AS(implicit_diffusion_solve(rhs, op, 0.0), InvalidArgument);
  CHECK_THROWS_AS(implicit_diffusion_solve(Field(10, 1.0), op, 1.0), InvalidArgument);

  const LinearMap negative = [](std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = -in[i];
  };
  Field x(rhs.size(), 0.0);
  CHECK_THROWS_AS(conjugate_gradient(negative, rhs, x, {}), SolverError);

  Field zero_x(rhs.size(), 3.0);
  const SolveStats s = conjugate_gradient(negative, Field(rhs.size(), 0.0), zero_x, {});
  CHECK(s.iterations == 0);
  CHECK(zero_x[0] == 0.0);
}

TEST_CASE("weighted operator rejects bad conductivity") {
  const Grid g = build_grid(3, 3, 3.0, 3.0);
  Field w(9, 1.0);
  w[4] = 0.0;
  CHECK_THROWS_AS(StencilOperator::weighted(g, 1.0, w), InvalidArgument);
  CHECK_THROWS_AS(StencilOperator::weighted(g, 1.0, Field(8, 1.0)), InvalidArgument);
}
