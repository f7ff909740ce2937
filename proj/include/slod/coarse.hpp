#pragma once

#include <vector>

#include "slod/basis.hpp"
#include "slod/coeff.hpp"
#include "slod/fem.hpp"
#include "slod/slod_basis.hpp"

namespace slod {

struct BasisBuildOptions {
  int oversampling = 2;
  BasisFlavor flavor = BasisFlavor::slod;
  SuperlocalizationOptions superlocalization{};
  unsigned threads = 1;
};

/// All N_H d localized bases, index k N_H + q. Patches are processed
/// independently; the d functions of a patch share one PatchOperators.
std::vector<LocalBasis> build_bases(const MeshHierarchy &mesh, const CoefficientField &field,
                                    const BasisBuildOptions &options);

/// Multiscale Galerkin system over a set of localized bases.
struct CoarseSystem {
  std::vector<LocalBasis> bases;
  SparseMatrix stiffness;  // entry (i,j) = applied_i . phi_j; only overlapping pairs stored
  Vector load;             // (f, phi_i)
  Vector coefficients;
  Vector fine_solution;    // sum_i c_i phi_i on the global fine mesh
  double relative_residual = 0.0;
};

/// Assembles the stiffness from the stored applied vectors and the load from
/// the global fine load vector, without forming a global fine matrix.
CoarseSystem assemble_coarse(const MeshHierarchy &mesh, std::vector<LocalBasis> bases,
                             const Vector &fine_load, unsigned threads = 1);

/// Cholesky solve of the (lower triangle of the) stiffness, then reconstruction.
void solve_coarse(const MeshHierarchy &mesh, CoarseSystem &system);

/// sum_i c_i phi_i as a global fine vector.
Vector reconstruct(const MeshHierarchy &mesh, const std::vector<LocalBasis> &bases, const Vector &coefficients);

/// Q1 Galerkin solution on the coarse mesh (nested subspace of the fine space,
/// coefficients integrated exactly), returned on the fine mesh.
Vector solve_coarse_fem(const MeshHierarchy &mesh, const SparseMatrix &fine_stiffness, const Vector &fine_load);

/// Norms of reference - approximation.
Norms compute_errors(const Vector &reference, const Vector &approximation, const NormEvaluator &norms);

struct ConditionEstimate {
  double value = 0.0;
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  bool approximate = false;  // an iteration hit its cap
  int iterations = 0;
};

/// Power iteration for lambda_max, inverse iteration on a Cholesky factor
/// for lambda_min. Uses the lower triangle of `a`.
ConditionEstimate estimate_condition_number(const SparseMatrix &a, double tolerance = 1e-6,
                                            int max_iterations = 100000);

/// Smallest eigenvalue of G_ij = (g_i, g_j) over the zero-extended Q0 companions.
double companion_gram_diagnostic(const MeshHierarchy &mesh, const std::vector<LocalBasis> &bases);

/// Largest stored boundary residual over the bases (surrogate of sigma~).
double max_boundary_residual(const std::vector<LocalBasis> &bases);

}  // namespace slod
