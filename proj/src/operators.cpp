#include "refugia/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "refugia/error.hpp"

namespace refugia {

namespace {

double face_mean(double a, double b, FaceAverage avg) {
  if (avg == FaceAverage::Harmonic) return 2.0 * a * b / (a + b);
  return 0.5 * (a + b);
}

void check_size(const Grid& g, std::span<const double> f, const char* what) {
  if (f.size() != g.size()) {
    throw InvalidArgument(std::string(what) + " does not match the grid size");
  }
}

}  // namespace

StencilOperator StencilOperator::laplacian(const Grid& grid, double sigma) {
  return StencilOperator(grid, sigma,
                         Field(static_cast<std::size_t>(grid.nx - 1) * grid.ny, 1.0),
                         Field(static_cast<std::size_t>(grid.nx) * (grid.ny - 1), 1.0));
}

StencilOperator StencilOperator::weighted(const Grid& grid, double sigma,
                                          std::span<const double> cond,
                                          FaceAverage average) {
  check_size(grid, cond, "conductivity");
  for (double c : cond) {
    if (!(c > 0.0)) throw InvalidArgument("conductivity must be positive");
  }
  const int nx = grid.nx;
  const int ny = grid.ny;
  Field wx(static_cast<std::size_t>(nx - 1) * ny);
  Field wy(static_cast<std::size_t>(nx) * (ny - 1));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      wx[static_cast<std::size_t>(j) * (nx - 1) + i] =
          face_mean(cond[grid.index(i, j)], cond[grid.index(i + 1, j)], average);
    }
  }
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      wy[grid.index(i, j)] =
          face_mean(cond[grid.index(i, j)], cond[grid.index(i, j + 1)], average);
    }
  }
  return StencilOperator(grid, sigma, std::move(wx), std::move(wy));
}

void StencilOperator::apply(std::span<const double> f,
                            std::span<double> out) const {
  check_size(grid_, f, "field");
  check_size(grid_, out, "output");
  const int nx = grid_.nx;
  const int ny = grid_.ny;
  const double cx = sigma_ / (grid_.dx * grid_.dx);
  const double cy = sigma_ / (grid_.dy * grid_.dy);
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    const std::size_t xrow = static_cast<std::size_t>(j) * (nx - 1);
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = row + i;
      const double fc = f[c];
      double acc_x = 0.0;
      double acc_y = 0.0;
      if (i > 0) acc_x += wx_[xrow + i - 1] * (f[c - 1] - fc);
      if (i + 1 < nx) acc_x += wx_[xrow + i] * (f[c + 1] - fc);
      if (j > 0) acc_y += wy_[c - nx] * (f[c - nx] - fc);
      if (j + 1 < ny) acc_y += wy_[c] * (f[c + nx] - fc);
      out[c] = cx * acc_x + cy * acc_y;
    }
  }
}

Field StencilOperator::apply(std::span<const double> f) const {
  Field out(grid_.size());
  apply(f, out);
  return out;
}

Field StencilOperator::diagonal() const {
  const int nx = grid_.nx;
  const int ny = grid_.ny;
  const double cx = sigma_ / (grid_.dx * grid_.dx);
  const double cy = sigma_ / (grid_.dy * grid_.dy);
  Field d(grid_.size(), 0.0);
  for (int j = 0; j < ny; ++j) {
    const std::size_t xrow = static_cast<std::size_t>(j) * (nx - 1);
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = grid_.index(i, j);
      double s = 0.0;
      if (i > 0) s -= cx * wx_[xrow + i - 1];
      if (i + 1 < nx) s -= cx * wx_[xrow + i];
      if (j > 0) s -= cy * wy_[c - nx];
      if (j + 1 < ny) s -= cy * wy_[c];
      d[c] = s;
    }
  }
  return d;
}

double StencilOperator::spectral_bound() const {
  const Field d = diagonal();
  double worst = 0.0;
  for (double v : d) worst = std::max(worst, -v);
  // Off-diagonal row sums equal |diagonal| for a zero-row-sum operator.
  return 2.0 * worst;
}

Field laplacian_apply(const Grid& grid, std::span<const double> field,
                      double sigma) {
  return StencilOperator::laplacian(grid, sigma).apply(field);
}

Field ideal_free_apply(const Grid& grid, std::span<const double> pred,
                       std::span<const double> r_p, double sigma_p,
                       FaceAverage average) {
  check_size(grid, pred, "predator field");
  const StencilOperator op = StencilOperator::weighted(grid, sigma_p, r_p, average);
  Field scaled(pred.size());
  for (std::size_t c = 0; c < pred.size(); ++c) scaled[c] = pred[c] / r_p[c];
  return op.apply(scaled);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

SolveStats conjugate_gradient(const LinearMap& a, std::span<const double> rhs,
                              std::span<double> x, const SolveOptions& opts,
                              std::span<const double> inv_diag) {
  const std::size_t n = rhs.size();
  const double rhs_norm = norm2(rhs);
  SolveStats stats;
  if (rhs_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return stats;
  }
  Field r(n), z(n), p(n), ap(n);
  a(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - ap[i];
  double res = norm2(r);
  const double target = opts.rel_tol * rhs_norm;
  auto precondition = [&](const Field& in, Field& out) {
    if (inv_diag.empty()) {
      out = in;
    } else {
      for (std::size_t i = 0; i < n; ++i) out[i] = inv_diag[i] * in[i];
    }
  };
  precondition(r, z);
  p = z;
  double rz = dot(r, z);
  int it = 0;
  while (res > target && it < opts.max_iter) {
    a(p, ap);
    const double curvature = dot(p, ap);
    if (!(curvature > 0.0)) {
      throw SolverError("conjugate gradient met non-positive curvature; "
                        "system is not positive definite");
    }
    const double step = rz / curvature;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += step * p[i];
      r[i] -= step * ap[i];
    }
    ++it;
    res = norm2(r);
    if (res <= target) break;
    precondition(r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  stats.iterations = it;
  stats.rel_residual = res / rhs_norm;
  if (res > target) {
    std::ostringstream msg;
    msg << "conjugate gradient did not converge in " << opts.max_iter
        << " iterations (relative residual " << stats.rel_residual << ")";
    throw SolverError(msg.str());
  }
  return stats;
}

Field implicit_diffusion_solve(std::span<const double> rhs,
                               const StencilOperator& op, double dt,
                               const SolveOptions& opts,
                               std::span<const double> mass,
                               std::span<const double> initial_guess,
                               SolveStats* stats) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  const Grid& g = op.grid();
  check_size(g, rhs, "right-hand side");
  if (!mass.empty()) check_size(g, mass, "mass");

  Field u(rhs.begin(), rhs.end());
  if (!initial_guess.empty()) {
    check_size(g, initial_guess, "initial guess");
    std::copy(initial_guess.begin(), initial_guess.end(), u.begin());
  } else if (!mass.empty()) {
    for (std::size_t c = 0; c < u.size(); ++c) u[c] /= mass[c];
  }

  Field inv_diag;
  if (opts.jacobi) {
    inv_diag = op.diagonal();
    for (std::size_t c = 0; c < inv_diag.size(); ++c) {
      const double m = mass.empty() ? 1.0 : mass[c];
      inv_diag[c] = 1.0 / (m - dt * inv_diag[c]);
    }
  }
  Field tmp(g.size());
  const LinearMap a = [&](std::span<const double> in, std::span<double> out) {
    op.apply(in, tmp);
    for (std::size_t c = 0; c < in.size(); ++c) {
      const double m = mass.empty() ? 1.0 : mass[c];
      out[c] = m * in[c] - dt * tmp[c];
    }
  };
  const SolveStats s = conjugate_gradient(a, rhs, u, opts, inv_diag);
  if (stats) *stats = s;
  return u;
}

}  // namespace refugia
