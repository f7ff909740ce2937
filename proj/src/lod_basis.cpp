#include "slod/lod_basis.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace slod {

Vector to_global(const MeshHierarchy &mesh, const LocalBasis &basis) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(mesh.n_fine_dofs()));
  const Patch &p = *basis.patch;
  for (std::size_t i = 0; i < p.interior_dofs.size(); ++i)
    out[static_cast<Eigen::Index>(p.global_dof(mesh, p.interior_dofs[i]))] = basis.values[i];
  return out;
}

Vector PatchOperators::solve(const Vector &rhs) const { return factorization->solve(rhs); }

Vector PatchOperators::cell_means(const Vector &interior_values) const {
  return interior_means * interior_values;
}

Vector PatchOperators::extend(const Vector &interior_values) const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(patch->n_dofs()));
  for (std::size_t i = 0; i < patch->interior_dofs.size(); ++i)
    out[static_cast<Eigen::Index>(patch->interior_dofs[i])] = interior_values[i];
  return out;
}

PatchOperators build_patch_operators(const MeshHierarchy &mesh, std::shared_ptr<const Patch> patch,
                                     const CoefficientField &field) {
  const std::string id = "patch " + std::to_string(patch->center_cell);
  if (patch->interior_dofs.empty()) throw std::runtime_error(id + " has no interior DOFs");

  PatchOperators ops;
  ops.patch = patch;
  ops.cell_measure = mesh.coarse_cell_measure();
  ops.stiffness = assemble_patch_stiffness(mesh, *patch, field, false);
  ops.constrained = restrict_matrix(ops.stiffness, patch->interior_dofs, patch->interior_dofs);
  ops.factorization = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(ops.constrained);
  if (ops.factorization->info() != Eigen::Success || (ops.factorization->vectorD().array() <= 0.0).any())
    throw std::runtime_error(id + ": constrained stiffness is not SPD");

  ops.projection = assemble_projection(mesh, *patch);
  std::vector<std::size_t> all_rows(ops.projection.means.rows());
  for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;
  ops.interior_means = restrict_matrix(ops.projection.means, all_rows, patch->interior_dofs);

  // Columns of the right-hand side are (e_k chi_Tq, e_s phi_p) over interior DOFs.
  const Matrix pairing = Matrix(ops.interior_means.transpose()) * ops.cell_measure;
  ops.responses = ops.factorization->solve(pairing);
  ops.schur = ops.interior_means * ops.responses;

  const Matrix sym = 0.5 * (ops.schur + ops.schur.transpose());
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() != Eigen::Success) throw std::runtime_error(id + ": operator D is not SPD");
  ops.companions = llt.solve(Matrix::Identity(sym.rows(), sym.cols()));
  return ops;
}

LocalBasis make_basis(const PatchOperators &ops, std::size_t local_cell, int component,
                      const Vector &companion, bool normalize, BasisFlavor flavor) {
  LocalBasis b;
  b.flavor = flavor;
  b.cell = ops.patch->coarse_cells.at(local_cell);
  b.component = component;
  b.patch = ops.patch;
  b.values = ops.responses * companion;
  b.companion = companion;
  b.energy_norm = std::sqrt(b.values.dot(ops.constrained * b.values));
  if (!std::isfinite(b.energy_norm) || b.energy_norm <= 0.0)
    throw std::runtime_error("patch " + std::to_string(ops.patch->center_cell) +
                             ": basis has non-positive or non-finite energy norm");
  b.candidate_norm = b.energy_norm;
  if (normalize) {
    const double s = 1.0 / b.energy_norm;
    b.values *= s;
    b.companion *= s;
    b.energy_norm = std::sqrt(b.values.dot(ops.constrained * b.values));
  }
  b.applied = ops.stiffness * ops.extend(b.values);
  return b;
}

LocalBasis lod_basis(const PatchOperators &ops, std::size_t local_cell, int component) {
  const auto j = static_cast<Eigen::Index>(ops.coarse_index(local_cell, component));
  return make_basis(ops, local_cell, component, ops.companions.col(j), false, BasisFlavor::lod);
}

const Matrix &companion_matrix(const PatchOperators &ops) { return ops.companions; }

void write_basis_csv_header(std::ostream &os) { os << "patch,T,k,energy_norm,companion\n"; }

void write_basis_csv_row(std::ostream &os, const LocalBasis &basis) {
  os.precision(17);
  os << basis.patch->center_cell << ',' << basis.cell << ',' << basis.component << ','
     << basis.energy_norm;
  for (Eigen::Index i = 0; i < basis.companion.size(); ++i) os << ',' << basis.companion[i];
  os << '\n';
}

}  // namespace slod
