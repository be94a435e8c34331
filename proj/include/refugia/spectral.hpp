#pragma once

#include <span>
#include <utility>
#include <vector>

#include "refugia/coefficients.hpp"
#include "refugia/geometry.hpp"
#include "refugia/operators.hpp"

namespace refugia {

enum class Normalization { MinOne, MaxOne, L2One };

struct SpectralResult {
  double lambda1 = 0.0;
  Field eigenfunction;
  // ||op(phi) - lambda1 phi|| / ||phi|| in the operator's own variables.
  double residual = 0.0;
  Normalization normalization = Normalization::L2One;
  int iterations = 0;
};

struct EigenOptions {
  double eig_tol = 1e-12;
  double residual_tol = 1e-10;
  int max_iter = 5000;
};

/// Smallest eigenpair of (-D + diag(q)) phi = lambda diag(w) phi, where D is
/// the (negative semi-definite) stencil operator and w defaults to 1.
/// Shifted inverse iteration; every shift is a certified lower bound of
/// lambda1, so each inner conjugate-gradient solve is SPD.
SpectralResult principal_eigenpair(const StencilOperator& diffusion,
                                   std::span<const double> q,
                                   std::span<const double> weight,
                                   Normalization normalization,
                                   const EigenOptions& opts = {});

/// Neumann Laplacian case: (-sigma Lap + q) phi = lambda w phi.
SpectralResult principal_eigenpair(double sigma, std::span<const double> q,
                                   const Grid& grid,
                                   std::span<const double> weight,
                                   Normalization normalization,
                                   const EigenOptions& opts = {});

// Potentials of the linearized vector operators.
Field potential_vs(const CoefficientFields& fields, const ModelParams& params);
Field potential_vi(const CoefficientFields& fields, const ModelParams& params);

/// -sigma_V Lap - r_V + h r_P / s_P, normalized with min phi = 1.
SpectralResult lambda1_vs(const CoefficientFields& fields,
                          const ModelParams& params,
                          const EigenOptions& opts = {});

/// -sigma_V Lap + alpha + d_V + h r_P / s_P, normalized with max phi = 1.
SpectralResult lambda1_vi(const CoefficientFields& fields,
                          const ModelParams& params,
                          const EigenOptions& opts = {});

/// -sigma_P div(r_P grad(. / r_P)) + r_P. The eigenfunction is returned in
/// predator variables (P = r_P u), L2-normalized.
SpectralResult lambda1_p(const CoefficientFields& fields,
                         const ModelParams& params,
                         FaceAverage average = FaceAverage::Arithmetic,
                         const EigenOptions& opts = {});

constexpr double kMarginalTolerance = 1e-8;

Regime classify_lambda(double lambda1_vs, double tol = kMarginalTolerance);
Regime regime_classify(const CoefficientFields& fields,
                       const ModelParams& params,
                       double tol = kMarginalTolerance);

/// Infinite-frequency limit of lambda1(L_Vs) at a fixed refuge area fraction.
double homogenized_limit(const ModelParams& params, double area_fraction);

/// lambda1(L_Vs) on the frequency-n refuge layout of the given total area.
double lambda1_for_frequency(const ModelParams& params, const Grid& grid,
                             double area, int n);

/// (n, lambda1) rows in ascending n.
std::vector<std::pair<int, double>> frequency_curve(const ModelParams& params,
                                                    const Grid& grid,
                                                    double area,
                                                    std::vector<int> n_list);

/// Dense symmetric reference: smallest generalized eigenvalue, assembled by
/// applying the stencil to unit vectors. Meant for small grids.
double dense_lambda1(const StencilOperator& diffusion,
                     std::span<const double> q,
                     std::span<const double> weight);

}  // namespace refugia
