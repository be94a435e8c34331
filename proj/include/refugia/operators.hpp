#pragma once

#include <functional>
#include <span>

#include "refugia/geometry.hpp"

namespace refugia {

/// How a per-cell conductivity is averaged onto the face between two cells.
enum class FaceAverage { Arithmetic, Harmonic };

/// Conservative 5-point operator f -> sigma * div_h(w grad_h f) with zero
/// flux through the domain boundary. Symmetric and negative semi-definite;
/// constants lie in its kernel.
class StencilOperator {
 public:
  static StencilOperator laplacian(const Grid& grid, double sigma);
  static StencilOperator weighted(const Grid& grid, double sigma,
                                  std::span<const double> conductivity,
                                  FaceAverage average = FaceAverage::Arithmetic);

  void apply(std::span<const double> f, std::span<double> out) const;
  Field apply(std::span<const double> f) const;

  /// Diagonal entries of the induced matrix (all <= 0).
  Field diagonal() const;

  /// Gershgorin bound on the spectral radius of the induced matrix.
  double spectral_bound() const;

  const Grid& grid() const { return grid_; }
  double sigma() const { return sigma_; }
  // x-face weights, (nx-1)*ny entries, face (i+1/2, j) at j*(nx-1)+i.
  std::span<const double> x_weights() const { return wx_; }
  // y-face weights, nx*(ny-1) entries, face (i, j+1/2) at j*nx+i.
  std::span<const double> y_weights() const { return wy_; }

 private:
  StencilOperator(const Grid& grid, double sigma, Field wx, Field wy)
      : grid_(grid), sigma_(sigma), wx_(std::move(wx)), wy_(std::move(wy)) {}

  Grid grid_;
  double sigma_;
  Field wx_;
  Field wy_;
};

Field laplacian_apply(const Grid& grid, std::span<const double> field,
                      double sigma);

/// sigma_p * div(r_p grad(P / r_p)) in conservative form.
Field ideal_free_apply(const Grid& grid, std::span<const double> pred,
                       std::span<const double> r_p, double sigma_p,
                       FaceAverage average = FaceAverage::Arithmetic);

struct SolveOptions {
  double rel_tol = 1e-10;
  int max_iter = 20000;
  bool jacobi = false;
};

struct SolveStats {
  int iterations = 0;
  double rel_residual = 0.0;
};

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

/// Preconditioned conjugate gradient on an SPD map. `x` holds the initial
/// guess on entry. `inv_diag` (optional) enables Jacobi preconditioning.
/// Throws SolverError when the relative residual is not reached.
SolveStats conjugate_gradient(const LinearMap& a, std::span<const double> rhs,
                              std::span<double> x, const SolveOptions& opts,
                              std::span<const double> inv_diag = {});

/// Solves (M - dt * op) u = rhs, M = diag(mass) (identity when empty).
/// The initial guess defaults to rhs / mass.
Field implicit_diffusion_solve(std::span<const double> rhs,
                               const StencilOperator& op, double dt,
                               const SolveOptions& opts = {},
                               std::span<const double> mass = {},
                               std::span<const double> initial_guess = {},
                               SolveStats* stats = nullptr);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace refugia
