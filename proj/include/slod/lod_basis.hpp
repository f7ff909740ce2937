#pragma once

#include <Eigen/SparseCholesky>
#include <iosfwd>
#include <memory>

#include "slod/basis.hpp"
#include "slod/coeff.hpp"
#include "slod/fem.hpp"

namespace slod {

/// Everything the cell problems of one patch share: the factorized
/// constrained stiffness, the cellwise-mean operator, the harmonic responses
/// W = A^-1 (e_k chi_Tq) and the dense operator D = P A^-1 P^T with its inverse.
///
/// Coarse index j = k * n_cells + q throughout (component-major).
struct PatchOperators {
  std::shared_ptr<const Patch> patch;
  double cell_measure = 0.0;

  SparseMatrix stiffness;    // unconstrained, all patch DOFs
  SparseMatrix constrained;  // interior DOFs
  std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> factorization;

  ProjectionOperator projection;  // columns: all patch DOFs
  SparseMatrix interior_means;     // projection restricted to interior columns

  Matrix responses;  // W, n_interior x (n_cells d)
  Matrix schur;      // D = P W, (n_cells d) square, SPD
  Matrix companions; // D^-1; column j holds the companion coefficients of the LOD function j

  std::size_t n_coarse() const { return static_cast<std::size_t>(schur.rows()); }
  std::size_t coarse_index(std::size_t q, int k) const { return k * patch->n_cells() + q; }

  /// Solves the constrained patch problem for an interior right-hand side.
  Vector solve(const Vector &rhs) const;
  /// Cell means of an interior vector (zero trace assumed).
  Vector cell_means(const Vector &interior_values) const;
  /// Zero-extends an interior vector to all patch DOFs.
  Vector extend(const Vector &interior_values) const;
};

/// Builds the operators of one patch. Throws if the patch has no interior
/// DOFs or if the constrained stiffness or D fails to factorize.
PatchOperators build_patch_operators(const MeshHierarchy &mesh, std::shared_ptr<const Patch> patch,
                                     const CoefficientField &field);

/// psi = A^-1 g with g = D^-1 e_k chi_T; T is the local cell index q.
/// Not normalized: its cell means are exactly the indicator of (T, k).
LocalBasis lod_basis(const PatchOperators &ops, std::size_t local_cell, int component);

/// Turns a fine function given by companion coefficients into a LocalBasis,
/// optionally scaling it to unit energy norm.
LocalBasis make_basis(const PatchOperators &ops, std::size_t local_cell, int component,
                      const Vector &companion, bool normalize, BasisFlavor flavor);

/// D^-1 in component-major ordering.
const Matrix &companion_matrix(const PatchOperators &ops);

/// CSV rows: patch,T,k,energy_norm,companion...
void write_basis_csv_header(std::ostream &os);
void write_basis_csv_row(std::ostream &os, const LocalBasis &basis);

}  // namespace slod
