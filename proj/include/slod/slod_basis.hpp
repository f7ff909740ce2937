#pragma once

#include <vector>

#include "slod/lod_basis.hpp"

namespace slod {

/// Discrete traction functional of the harmonic responses on Sigma:
/// B(s n_b + p, k n_e + q) = a(W_(q,k), e_s phi_p) - (e_k chi_Tq, e_s phi_p).
/// Zero rows when the patch covers the whole domain.
Matrix assemble_boundary_matrix(const PatchOperators &ops);

/// The same functional tested against every patch DOF (rows in local DOF
/// order). Rows at interior DOFs vanish by Galerkin orthogonality.
Matrix patch_residual_functional(const PatchOperators &ops);

/// Singular value decomposition of the symmetric PSD matrix (BD)^T BD.
struct SpectralState {
  Vector singular_values;  // descending
  Matrix left;             // u_i as columns
  Matrix right;            // v_i as columns
  int rank = 0;
};

/// Singular values at or below max(sigma_1 * relative_tolerance, absolute_floor) count as zero.
SpectralState spectral_decomposition(const Matrix &normal_matrix, double relative_tolerance = 1e-12,
                                     double absolute_floor = 1e-30);

struct SuperlocalizationOptions {
  double stability_tolerance = 0.5;  // delta_s
  double rank_tolerance = 1e-12;
  double rank_floor = 1e-30;
};

struct SuperlocalizationStep {
  int rank = 0;
  double residual = 0.0;   // t = |BDc + Bd|
  double deviation = 0.0;
};

/// Intermediate quantities of one superlocalization, for diagnostics and tests.
struct SuperlocalizationTrace {
  Matrix reduced_operator;  // BD, center column removed
  Vector center_functional; // B d of the center
  SpectralState spectrum;
  Vector full_rank_correction;
  Vector accepted_correction;
  std::vector<SuperlocalizationStep> steps;  // in loop order, rank descending
};

/// Stability deviation max |(Pi_H phi)/z - e_k chi_T| over all cells and
/// components, given the cell means of phi on its patch (k * n_cells + q
/// ordering; cells outside the patch contribute 0). Returns +inf when z = 0.
double stability_deviation(const Vector &cell_means, std::size_t center);

/// Cell means of the extension of a fine interior vector.
Vector project_to_cells(const PatchOperators &ops, const Vector &interior_values);

/// Superlocalized, energy-normalized basis for (local cell, component).
///
/// Starts at full numerical rank and drops the smallest singular value until
/// the stability deviation is within options.stability_tolerance; rank 0 is
/// the LOD function and is always accepted. Patches without Sigma nodes
/// return the normalized LOD function directly.
LocalBasis superlocalize(const PatchOperators &ops, const Matrix &boundary, std::size_t local_cell,
                         int component, const SuperlocalizationOptions &options = {},
                         SuperlocalizationTrace *trace = nullptr);

}  // namespace slod
