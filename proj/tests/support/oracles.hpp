#pragma once

// Reference computations written directly from the model definitions. They
// share no code with the library beyond plain data types.

#include <Eigen/Dense>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "refugia/coefficients.hpp"

namespace oracle {

struct GridDims {
  int nx, ny;
  double lx, ly;
  double dx() const { return lx / nx; }
  double dy() const { return ly / ny; }
  int size() const { return nx * ny; }
};

// Dense matrix of u -> sigma * div(w grad u) with no-flux boundaries. Face
// conductivities come from `face(a, b)` applied to the two cell values of
// `w` (all ones for the plain Laplacian).
inline Eigen::MatrixXd diffusion_matrix(const GridDims& g, double sigma,
                                        const std::vector<double>& w,
                                        const std::function<double(double, double)>& face) {
  const int n = g.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  auto link = [&](int c, int d, double h) {
    const double k = sigma * face(w[c], w[d]) / (h * h);
    a(c, c) -= k;
    a(c, d) += k;
  };
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int c = j * g.nx + i;
      if (i > 0) link(c, c - 1, g.dx());
      if (i + 1 < g.nx) link(c, c + 1, g.dx());
      if (j > 0) link(c, c - g.nx, g.dy());
      if (j + 1 < g.ny) link(c, c + g.nx, g.dy());
    }
  }
  return a;
}

inline double arithmetic(double a, double b) { return 0.5 * (a + b); }
inline double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

inline Eigen::MatrixXd laplacian_matrix(const GridDims& g, double sigma) {
  return diffusion_matrix(g, sigma, std::vector<double>(g.size(), 1.0), arithmetic);
}

// Smallest eigenvalue of K v = lambda W v, K = -A + diag(q), W = diag(w),
// through the symmetric similarity transform W^-1/2 K W^-1/2.
inline double smallest_eigenvalue(const Eigen::MatrixXd& a, const std::vector<double>& q,
                                  const std::vector<double>& w) {
  const int n = static_cast<int>(q.size());
  Eigen::MatrixXd k = -a;
  for (int c = 0; c < n; ++c) k(c, c) += q[c];
  Eigen::VectorXd s(n);
  for (int c = 0; c < n; ++c) s(c) = 1.0 / std::sqrt(w[c]);
  const Eigen::MatrixXd m = s.asDiagonal() * k * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline std::vector<double> random_field(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> f(static_cast<std::size_t>(n));
  for (double& v : f) v = u(rng);
  return f;
}

// Spatially homogeneous version of the host-vector-predator system, state
// (I, V_i, V_s, P), for constant coefficients r_V, r_P, H.
struct HomogeneousSystem {
  refugia::ModelParams p;
  double r_v, r_p, host;

  using State = std::array<double, 4>;

  void operator()(const State& x, State& dx, double) const {
    const double inf = x[0], vi = x[1], vs = x[2], pr = x[3];
    const double v = vi + vs;
    const double b_v = r_v + p.d_v;
    dx[0] = p.beta_vh * (host - inf) * vi;
    dx[1] = p.beta_hv * inf * vs - p.alpha * vi - p.d_v * vi - p.s_v * v * vi - p.h * pr * vi;
    dx[2] = -p.beta_hv * inf * vs + p.alpha * vi - p.d_v * vs - p.s_v * v * vs - p.h * pr * vs +
            b_v * v;
    dx[3] = p.gamma * p.h * v * pr + r_p * pr - p.s_p * pr * pr;
  }
};

// High-accuracy adaptive solution sampled at `times` (ascending, from 0).
inline std::vector<HomogeneousSystem::State> ode_reference(const HomogeneousSystem& sys,
                                                           HomogeneousSystem::State x0,
                                                           const std::vector<double>& times) {
  namespace odeint = boost::numeric::odeint;
  using State = HomogeneousSystem::State;
  std::vector<State> out;
  out.reserve(times.size());
  auto stepper = odeint::make_dense_output(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>());
  odeint::integrate_times(stepper, sys, x0, times.begin(), times.end(), 1e-3,
                          [&](const State& x, double) { out.push_back(x); });
  return out;
}

}  // namespace oracle
