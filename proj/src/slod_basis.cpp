#include "slod/slod_basis.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace slod {

Matrix patch_residual_functional(const PatchOperators &ops) {
  const Matrix extended = [&] {
    Matrix w = Matrix::Zero(static_cast<Eigen::Index>(ops.patch->n_dofs()), ops.responses.cols());
    for (std::size_t i = 0; i < ops.patch->interior_dofs.size(); ++i)
      w.row(static_cast<Eigen::Index>(ops.patch->interior_dofs[i])) = ops.responses.row(i);
    return w;
  }();
  const Matrix pairing = Matrix(ops.projection.mass_pairing().transpose());
  return ops.stiffness * extended - pairing;
}

Matrix assemble_boundary_matrix(const PatchOperators &ops) {
  const auto &sigma = ops.patch->sigma_dofs;
  const auto n = static_cast<Eigen::Index>(ops.n_coarse());
  if (sigma.empty()) return Matrix(0, n);

  std::vector<std::size_t> cols(ops.patch->interior_dofs);
  const SparseMatrix coupling = restrict_matrix(ops.stiffness, sigma, cols);
  std::vector<std::size_t> rows(ops.projection.means.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const SparseMatrix pairing = restrict_matrix(ops.projection.mass_pairing(), rows, sigma);
  return coupling * ops.responses - Matrix(pairing.transpose());
}

SpectralState spectral_decomposition(const Matrix &normal_matrix, double relative_tolerance,
                                     double absolute_floor) {
  SpectralState s;
  if (normal_matrix.size() == 0) return s;
  Eigen::BDCSVD<Matrix> svd(normal_matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw std::runtime_error("SVD of (BD)^T BD failed");
  s.singular_values = svd.singularValues();
  s.left = svd.matrixU();
  s.right = svd.matrixV();
  const double cut = std::max(s.singular_values[0] * relative_tolerance, absolute_floor);
  while (s.rank < s.singular_values.size() && s.singular_values[s.rank] > cut) ++s.rank;
  return s;
}

double stability_deviation(const Vector &cell_means, std::size_t center) {
  const double z = cell_means[static_cast<Eigen::Index>(center)];
  if (z == 0.0 || !std::isfinite(z)) return std::numeric_limits<double>::infinity();
  double dev = 0.0;
  for (Eigen::Index i = 0; i < cell_means.size(); ++i) {
    const double target = static_cast<std::size_t>(i) == center ? 1.0 : 0.0;
    dev = std::max(dev, std::abs(cell_means[i] / z - target));
  }
  return dev;
}

Vector project_to_cells(const PatchOperators &ops, const Vector &interior_values) {
  return ops.cell_means(interior_values);
}

namespace {

// Cell means of W (d_center + D c) are e_center + c scattered to the other
// slots, since P W = D_op and D_op D_op^-1 = I.
Vector candidate_means(std::size_t n, std::size_t center, const Vector &correction) {
  Vector m = Vector::Zero(static_cast<Eigen::Index>(n));
  m[static_cast<Eigen::Index>(center)] = 1.0;
  for (std::size_t j = 0, o = 0; j < n; ++j)
    if (j != center) m[static_cast<Eigen::Index>(j)] = correction[static_cast<Eigen::Index>(o++)];
  return m;
}

}  // namespace

LocalBasis superlocalize(const PatchOperators &ops, const Matrix &boundary, std::size_t local_cell,
                         int component, const SuperlocalizationOptions &options,
                         SuperlocalizationTrace *trace) {
  const std::size_t n = ops.n_coarse();
  const std::size_t center = ops.coarse_index(local_cell, component);
  const auto center_col = static_cast<Eigen::Index>(center);

  if (boundary.rows() == 0 || n == 1) {
    LocalBasis b = make_basis(ops, local_cell, component, ops.companions.col(center_col), true,
                              BasisFlavor::slod);
    if (trace) *trace = SuperlocalizationTrace{};
    return b;
  }

  const Matrix full = boundary * ops.companions;
  const Vector rhs = full.col(center_col);
  Matrix reduced(full.rows(), static_cast<Eigen::Index>(n - 1));
  Matrix others(ops.companions.rows(), static_cast<Eigen::Index>(n - 1));
  for (std::size_t j = 0, o = 0; j < n; ++j) {
    if (j == center) continue;
    reduced.col(static_cast<Eigen::Index>(o)) = full.col(static_cast<Eigen::Index>(j));
    others.col(static_cast<Eigen::Index>(o)) = ops.companions.col(static_cast<Eigen::Index>(j));
    ++o;
  }

  const Matrix normal = reduced.transpose() * reduced;
  SpectralState spectrum = spectral_decomposition(normal, options.rank_tolerance, options.rank_floor);
  const Vector projected_rhs = reduced.transpose() * rhs;

  // c_s = -sum_{i <= r_s} sigma_i^-1 v_i u_i^T (BD)^T B d
  Vector weights(spectrum.rank);
  for (int i = 0; i < spectrum.rank; ++i)
    weights[i] = spectrum.left.col(i).dot(projected_rhs) / spectrum.singular_values[i];

  const auto correction_at = [&](int rank) -> Vector {
    return -(spectrum.right.leftCols(rank) * weights.head(rank));
  };

  std::vector<SuperlocalizationStep> steps;
  Vector accepted;
  for (int rank = spectrum.rank; rank >= 0; --rank) {
    Vector c = correction_at(rank);
    SuperlocalizationStep step;
    step.rank = rank;
    step.residual = (reduced * c + rhs).norm();
    step.deviation = stability_deviation(candidate_means(n, center, c), center);
    if (!std::isfinite(step.residual))
      throw std::runtime_error("patch " + std::to_string(ops.patch->center_cell) +
                               ": non-finite superlocalization residual");
    steps.push_back(step);
    if (rank == 0 || step.deviation <= options.stability_tolerance) {
      accepted = std::move(c);
      break;
    }
  }

  const Vector companion = ops.companions.col(center_col) + others * accepted;
  LocalBasis b = make_basis(ops, local_cell, component, companion, true, BasisFlavor::slod);
  b.numerical_rank = spectrum.rank;
  b.stabilization_rank = steps.back().rank;
  b.residual_full = steps.front().residual;
  b.residual_stabilized = steps.back().residual;
  b.deviation = steps.back().deviation;
  b.boundary_residual = (boundary * b.companion).norm();

  if (trace) {
    trace->reduced_operator = reduced;
    trace->center_functional = rhs;
    trace->full_rank_correction = correction_at(spectrum.rank);
    trace->accepted_correction = accepted;
    trace->spectrum = std::move(spectrum);
    trace->steps = std::move(steps);
  }
  return b;
}

}  // namespace slod
