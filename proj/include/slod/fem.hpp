#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "slod/coeff.hpp"
#include "slod/mesh.hpp"

namespace slod {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Vector Q1 element matrix, local DOF k * 4 + vertex.
using ElementMatrix = Eigen::Matrix<double, kDim * kCellNodes, kDim * kCellNodes>;
using ScalarElementMatrix = Eigen::Matrix<double, kCellNodes, kCellNodes>;

/// Tensor-product Gauss rule on [0,1]^2.
struct QuadratureRule {
  std::vector<std::array<double, kDim>> points;
  std::vector<double> weights;

  static QuadratureRule gauss(int points_per_axis);
};

/// Q1 shape functions on [0,1]^2 and their reference gradients.
std::array<double, kCellNodes> q1_values(double xi, double eta);
std::array<std::array<double, kDim>, kCellNodes> q1_gradients(double xi, double eta);

/// a(u,v) = (2 mu eps(u), eps(v)) + (lambda div u, div v) on an hx-by-hy cell.
ElementMatrix element_stiffness(double hx, double hy, LameParameters lame);
ScalarElementMatrix element_mass(double hx, double hy);
ScalarElementMatrix element_laplace(double hx, double hy);

/// Global stiffness over all vector DOFs (boundary nodes included).
SparseMatrix assemble_stiffness(const MeshHierarchy &mesh, const CoefficientField &field);
/// Scalar node-based mass and grad-grad matrices.
SparseMatrix assemble_scalar_mass(const MeshHierarchy &mesh);
SparseMatrix assemble_scalar_laplace(const MeshHierarchy &mesh);

/// Patch stiffness. Constrained: rows/cols are patch.interior_dofs (SPD).
/// Unconstrained: all patch DOFs in local order (PSD).
SparseMatrix assemble_patch_stiffness(const MeshHierarchy &mesh, const Patch &patch,
                                      const CoefficientField &field, bool constrained);

/// Cellwise-mean operator: (P v)_(T,k) = |T|^-1 int_T v_k. Rows are
/// k * n_cells + q; (mass pairing) = cell_measure * P.
struct ProjectionOperator {
  SparseMatrix means;
  double cell_measure = 0.0;
  std::size_t n_cells = 0;

  SparseMatrix mass_pairing() const { return cell_measure * means; }
};

/// Patch variant: columns are all patch DOFs in local order.
ProjectionOperator assemble_projection(const MeshHierarchy &mesh, const Patch &patch);
/// Global variant: rows k * N_H + T, columns all global fine DOFs.
ProjectionOperator assemble_projection(const MeshHierarchy &mesh);

/// (f, e_k phi_j) by 2x2 Gauss per fine cell, all global DOFs.
Vector assemble_load(const MeshHierarchy &mesh, const RhsField &rhs);
/// Patch variant, all patch DOFs in local order.
Vector assemble_load(const MeshHierarchy &mesh, const Patch &patch, const RhsField &rhs);

SparseMatrix restrict_matrix(const SparseMatrix &a, std::span<const std::size_t> rows,
                             std::span<const std::size_t> cols);

struct FineSolution {
  Vector displacement;  // all global DOFs, zero on the boundary
  double relative_residual = 0.0;
};

/// Standard Q1 Galerkin solution with homogeneous Dirichlet data.
FineSolution solve_fine_reference(const MeshHierarchy &mesh, const CoefficientField &field,
                                  const RhsField &rhs);
FineSolution solve_fine_reference(const MeshHierarchy &mesh, const SparseMatrix &stiffness,
                                  const Vector &load);

struct Norms {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double energy = 0.0;
};

/// Evaluates discrete norms of fine vectors through the assembled quadratic forms.
class NormEvaluator {
 public:
  NormEvaluator(const MeshHierarchy &mesh, const CoefficientField &field);
  NormEvaluator(const MeshHierarchy &mesh, SparseMatrix stiffness);

  Norms operator()(const Vector &v) const;
  const SparseMatrix &stiffness() const { return stiffness_; }
  const SparseMatrix &scalar_mass() const { return mass_; }

 private:
  std::size_t n_nodes_;
  SparseMatrix mass_;
  SparseMatrix laplace_;
  SparseMatrix stiffness_;
};

/// Bilinear interpolation between nested node grids of n_from and n_to cells
/// per axis (n_to must be a multiple of n_from). Scalar, node-indexed.
SparseMatrix prolongation(int n_from, int n_to);
/// Applies the prolongation to each component of a global vector field.
Vector prolongate(const Vector &v, int n_from, int n_to);

/// Structured-grid CSV: x,y,u1,u2 per fine node.
void write_solution_csv(std::ostream &os, const MeshHierarchy &mesh, const Vector &u);

}  // namespace slod
