#include "refugia/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "refugia/error.hpp"

namespace refugia {

namespace {

void normalize_eigenfunction(Field& phi, Normalization norm) {
  double scale = 1.0;
  switch (norm) {
    case Normalization::MinOne:
      scale = *std::min_element(phi.begin(), phi.end());
      break;
    case Normalization::MaxOne:
      scale = *std::max_element(phi.begin(), phi.end());
      break;
    case Normalization::L2One:
      scale = norm2(phi);
      break;
  }
  for (double& v : phi) v /= scale;
}

}  // namespace

SpectralResult principal_eigenpair(const StencilOperator& diffusion,
                                   std::span<const double> q,
                                   std::span<const double> weight,
                                   Normalization normalization,
                                   const EigenOptions& opts) {
  const Grid& grid = diffusion.grid();
  const std::size_t n = grid.size();
  if (q.size() != n) throw InvalidArgument("potential does not match the grid");
  if (!weight.empty() && weight.size() != n) {
    throw InvalidArgument("weight does not match the grid");
  }
  auto w = [&](std::size_t c) { return weight.empty() ? 1.0 : weight[c]; };
  double w_min = std::numeric_limits<double>::infinity();
  double q_over_w_min = std::numeric_limits<double>::infinity();
  double q_over_w_abs = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    if (!(w(c) > 0.0)) throw InvalidArgument("eigen weight must be positive");
    if (!std::isfinite(q[c])) throw InvalidArgument("potential is not finite");
    w_min = std::min(w_min, w(c));
    q_over_w_min = std::min(q_over_w_min, q[c] / w(c));
    q_over_w_abs = std::max(q_over_w_abs, std::abs(q[c] / w(c)));
  }
  const double scale = diffusion.spectral_bound() / w_min + q_over_w_abs +
                       std::numeric_limits<double>::min();
  // K >= diag(q) >= min(q/w) W, so this shift is below lambda1.
  const double base_shift = q_over_w_min - 1e-2 * scale;
  const double min_margin = 1e-9 * scale;

  Field kx(n), wx(n), x(n, 1.0), y(n), tmp(n);
  auto apply_k = [&](std::span<const double> in, std::span<double> out) {
    diffusion.apply(in, tmp);
    for (std::size_t c = 0; c < n; ++c) out[c] = q[c] * in[c] - tmp[c];
  };

  auto w_normalize = [&](Field& v) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += w(c) * v[c] * v[c];
    s = std::sqrt(s);
    for (double& e : v) e /= s;
  };
  w_normalize(x);

  SolveOptions inner;
  inner.rel_tol = 1e-12;
  inner.max_iter = 50000;
  const Field stencil_diag = diffusion.diagonal();
  Field inv_diag(n);

  double rho_prev = std::numeric_limits<double>::infinity();
  double rho = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  for (;; ++it) {
    apply_k(x, kx);
    double xkx = 0.0;
    double xwx = 0.0;
    bool positive = true;
    double ratio_min = std::numeric_limits<double>::infinity();
    double ratio_max = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) {
      wx[c] = w(c) * x[c];
      xkx += x[c] * kx[c];
      xwx += x[c] * wx[c];
      if (x[c] <= 0.0) {
        positive = false;
      } else {
        const double ratio = kx[c] / wx[c];
        ratio_min = std::min(ratio_min, ratio);
        ratio_max = std::max(ratio_max, ratio);
      }
    }
    rho = xkx / xwx;
    double res2 = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      const double r = kx[c] - rho * wx[c];
      res2 += r * r;
    }
    residual = std::sqrt(res2) / norm2(wx);

    const bool settled =
        std::abs(rho - rho_prev) <= opts.eig_tol * std::max(1.0, std::abs(rho));
    if (settled && residual <= opts.residual_tol) break;
    if (it >= opts.max_iter) {
      std::ostringstream msg;
      msg << "principal eigenpair did not converge in " << opts.max_iter
          << " iterations (lambda " << rho << ", residual " << residual << ")";
      throw SolverError(msg.str());
    }
    rho_prev = rho;

    // For a positive iterate, min_i (Kx)_i/(Wx)_i <= lambda1 <= max_i (...).
    double shift = base_shift;
    if (positive) {
      const double margin = std::max(ratio_max - ratio_min, min_margin);
      shift = std::max(base_shift, ratio_min - margin);
    }
    for (std::size_t c = 0; c < n; ++c) {
      inv_diag[c] = 1.0 / (q[c] - stencil_diag[c] - shift * w(c));
    }
    const double gap = std::max(rho - shift, min_margin);
    for (std::size_t c = 0; c < n; ++c) y[c] = x[c] / gap;
    const LinearMap shifted = [&](std::span<const double> in,
                                  std::span<double> out) {
      apply_k(in, out);
      for (std::size_t c = 0; c < n; ++c) out[c] -= shift * w(c) * in[c];
    };
    conjugate_gradient(shifted, wx, y, inner, inv_diag);
    x = y;
    double sum = 0.0;
    for (double v : x) sum += v;
    if (sum < 0.0) {
      for (double& v : x) v = -v;
    }
    w_normalize(x);
  }

  double sum = 0.0;
  for (double v : x) sum += v;
  if (sum < 0.0) {
    for (double& v : x) v = -v;
  }
  if (*std::min_element(x.begin(), x.end()) <= 0.0) {
    throw SolverError("principal eigenfunction changed sign");
  }

  SpectralResult out;
  out.lambda1 = rho;
  out.residual = residual;
  out.normalization = normalization;
  out.iterations = it;
  out.eigenfunction = std::move(x);
  normalize_eigenfunction(out.eigenfunction, normalization);
  return out;
}

SpectralResult principal_eigenpair(double sigma, std::span<const double> q,
                                   const Grid& grid,
                                   std::span<const double> weight,
                                   Normalization normalization,
                                   const EigenOptions& opts) {
  return principal_eigenpair(StencilOperator::laplacian(grid, sigma), q,
                             weight, normalization, opts);
}

Field potential_vs(const CoefficientFields& fields, const ModelParams& params) {
  Field q(fields.r_v.size());
  for (std::size_t c = 0; c < q.size(); ++c) {
    q[c] = -fields.r_v[c] + params.h * fields.r_p[c] / params.s_p;
  }
  return q;
}

Field potential_vi(const CoefficientFields& fields, const ModelParams& params) {
  Field q(fields.r_v.size());
  for (std::size_t c = 0; c < q.size(); ++c) {
    q[c] = params.alpha + fields.d_v[c] + params.h * fields.r_p[c] / params.s_p;
  }
  return q;
}

SpectralResult lambda1_vs(const CoefficientFields& fields,
                          const ModelParams& params, const EigenOptions& opts) {
  const Field q = potential_vs(fields, params);
  return principal_eigenpair(params.sigma_v, q, fields.grid(), {},
                             Normalization::MinOne, opts);
}

SpectralResult lambda1_vi(const CoefficientFields& fields,
                          const ModelParams& params, const EigenOptions& opts) {
  const Field q = potential_vi(fields, params);
  return principal_eigenpair(params.sigma_v, q, fields.grid(), {},
                             Normalization::MaxOne, opts);
}

SpectralResult lambda1_p(const CoefficientFields& fields,
                         const ModelParams& params, FaceAverage average,
                         const EigenOptions& opts) {
  // With P = r_P u the operator becomes the symmetric pencil
  // (-sigma_P div(r_P grad u) + r_P^2 u, r_P u).
  const StencilOperator op = StencilOperator::weighted(
      fields.grid(), params.sigma_p, fields.r_p, average);
  Field q(fields.r_p.size());
  for (std::size_t c = 0; c < q.size(); ++c) q[c] = fields.r_p[c] * fields.r_p[c];
  SpectralResult res =
      principal_eigenpair(op, q, fields.r_p, Normalization::L2One, opts);
  for (std::size_t c = 0; c < q.size(); ++c) {
    res.eigenfunction[c] *= fields.r_p[c];
  }
  normalize_eigenfunction(res.eigenfunction, Normalization::L2One);
  if (!(res.lambda1 > 0.0)) {
    throw SolverError("lambda1(L_P) is not positive; operator assembly is broken");
  }
  return res;
}

Regime classify_lambda(double lambda1_vs, double tol) {
  if (lambda1_vs > tol) return Regime::Extinction;
  if (lambda1_vs < -tol) return Regime::Persistence;
  return Regime::Marginal;
}

Regime regime_classify(const CoefficientFields& fields,
                       const ModelParams& params, double tol) {
  return classify_lambda(lambda1_vs(fields, params).lambda1, tol);
}

double homogenized_limit(const ModelParams& params, double area_fraction) {
  if (!(area_fraction >= 0.0 && area_fraction <= 1.0)) {
    throw InvalidArgument("area fraction must lie in [0, 1]");
  }
  const double empty = -params.rv_field + params.h * params.rp_field / params.s_p;
  const double refuge =
      -params.rv_refuge + params.h * params.rp_refuge / params.s_p;
  return empty + area_fraction * refuge;
}

double lambda1_for_frequency(const ModelParams& params, const Grid& grid,
                             double area, int n) {
  const RefugeMask mask = refuge_frequency_mask(grid, n, area);
  const CoefficientFields fields = assemble_fields(params, mask);
  return lambda1_vs(fields, params).lambda1;
}

std::vector<std::pair<int, double>> frequency_curve(const ModelParams& params,
                                                    const Grid& grid,
                                                    double area,
                                                    std::vector<int> n_list) {
  std::sort(n_list.begin(), n_list.end());
  // Validate everything before the first solve.
  for (int n : n_list) (void)refuge_frequency_mask(grid, n, area);
  std::vector<std::pair<int, double>> rows;
  rows.reserve(n_list.size());
  for (int n : n_list) {
    rows.emplace_back(n, lambda1_for_frequency(params, grid, area, n));
  }
  return rows;
}

double dense_lambda1(const StencilOperator& diffusion,
                     std::span<const double> q,
                     std::span<const double> weight) {
  const std::size_t n = diffusion.grid().size();
  if (n > 4096) throw InvalidArgument("dense reference limited to 4096 cells");
  Eigen::MatrixXd k(n, n);
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(n, n);
  Field unit(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    unit[c] = 1.0;
    const Field col = diffusion.apply(unit);
    unit[c] = 0.0;
    for (std::size_t r = 0; r < n; ++r) k(r, c) = -col[r];
    k(c, c) += q[c];
    if (!weight.empty()) w(c, c) = weight[c];
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      k, w, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw SolverError("dense eigensolver failed");
  }
  return solver.eigenvalues().minCoeff();
}

}  // namespace refugia
