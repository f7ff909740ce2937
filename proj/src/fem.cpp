#include "slod/fem.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace slod {

namespace {

using Triplet = Eigen::Triplet<double>;

constexpr int kElementDofs = kDim * kCellNodes;

/// Stiffness split as mu * K_mu + lambda * K_lambda for one cell shape.
struct StiffnessSplit {
  ElementMatrix mu_part;
  ElementMatrix lambda_part;

  StiffnessSplit(double hx, double hy)
      : mu_part(element_stiffness(hx, hy, {0.0, 1.0})),
        lambda_part(element_stiffness(hx, hy, {1.0, 0.0})) {}

  ElementMatrix operator()(LameParameters lame) const {
    return lame.mu * mu_part + lame.lambda * lambda_part;
  }
};

}  // namespace

QuadratureRule QuadratureRule::gauss(int n) {
  std::vector<double> x, w;
  switch (n) {
    case 1:
      x = {0.5};
      w = {1.0};
      break;
    case 2: {
      const double d = 0.5 / std::sqrt(3.0);
      x = {0.5 - d, 0.5 + d};
      w = {0.5, 0.5};
      break;
    }
    case 3: {
      const double d = 0.5 * std::sqrt(0.6);
      x = {0.5 - d, 0.5, 0.5 + d};
      w = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
      break;
    }
    default:
      throw std::invalid_argument("Gauss rule with " + std::to_string(n) + " points not tabulated");
  }
  QuadratureRule q;
  for (std::size_t j = 0; j < x.size(); ++j)
    for (std::size_t i = 0; i < x.size(); ++i) {
      q.points.push_back({x[i], x[j]});
      q.weights.push_back(w[i] * w[j]);
    }
  return q;
}

std::array<double, kCellNodes> q1_values(double xi, double eta) {
  return {(1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta, xi * eta};
}

std::array<std::array<double, kDim>, kCellNodes> q1_gradients(double xi, double eta) {
  return {{{-(1 - eta), -(1 - xi)}, {(1 - eta), -xi}, {-eta, (1 - xi)}, {eta, xi}}};
}

ElementMatrix element_stiffness(double hx, double hy, LameParameters lame) {
  ElementMatrix k = ElementMatrix::Zero();
  const auto rule = QuadratureRule::gauss(2);
  const double jac = hx * hy;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    auto g = q1_gradients(rule.points[q][0], rule.points[q][1]);
    for (auto &gv : g) {
      gv[0] /= hx;
      gv[1] /= hy;
    }
    const double w = rule.weights[q] * jac;
    for (int kc = 0; kc < kDim; ++kc)
      for (int a = 0; a < kCellNodes; ++a)
        for (int lc = 0; lc < kDim; ++lc)
          for (int b = 0; b < kCellNodes; ++b) {
            // eps(e_k N_a) : eps(e_l N_b) = (delta_kl grad N_a . grad N_b + d_l N_a d_k N_b) / 2
            double v = lame.mu * (g[a][lc] * g[b][kc]) + lame.lambda * g[a][kc] * g[b][lc];
            if (kc == lc) v += lame.mu * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
            k(kc * kCellNodes + a, lc * kCellNodes + b) += w * v;
          }
  }
  return k;
}

ScalarElementMatrix element_mass(double hx, double hy) {
  ScalarElementMatrix m = ScalarElementMatrix::Zero();
  const auto rule = QuadratureRule::gauss(2);
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const auto n = q1_values(rule.points[q][0], rule.points[q][1]);
    for (int a = 0; a < kCellNodes; ++a)
      for (int b = 0; b < kCellNodes; ++b) m(a, b) += rule.weights[q] * hx * hy * n[a] * n[b];
  }
  return m;
}

ScalarElementMatrix element_laplace(double hx, double hy) {
  ScalarElementMatrix l = ScalarElementMatrix::Zero();
  const auto rule = QuadratureRule::gauss(2);
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const auto g = q1_gradients(rule.points[q][0], rule.points[q][1]);
    for (int a = 0; a < kCellNodes; ++a)
      for (int b = 0; b < kCellNodes; ++b)
        l(a, b) += rule.weights[q] * hx * hy *
                   (g[a][0] * g[b][0] / (hx * hx) + g[a][1] * g[b][1] / (hy * hy));
  }
  return l;
}

SparseMatrix assemble_stiffness(const MeshHierarchy &mesh, const CoefficientField &field) {
  if (!field.resolved_by(mesh))
    throw std::invalid_argument("fine mesh does not resolve the coefficient grid");
  const StiffnessSplit split(mesh.fine_size(0), mesh.fine_size(1));
  const std::size_t nn = mesh.n_fine_nodes();
  std::vector<Triplet> trips;
  trips.reserve(mesh.n_fine_cells() * kElementDofs * kElementDofs);
  for (int y = 0; y < mesh.n_fine(); ++y)
    for (int x = 0; x < mesh.n_fine(); ++x) {
      const auto ke = split(field.on_fine_cell(mesh, {x, y}));
      const auto nodes = mesh.fine_cell_nodes({x, y});
      for (int i = 0; i < kElementDofs; ++i)
        for (int j = 0; j < kElementDofs; ++j)
          trips.emplace_back(static_cast<int>((i / kCellNodes) * nn + nodes[i % kCellNodes]),
                             static_cast<int>((j / kCellNodes) * nn + nodes[j % kCellNodes]), ke(i, j));
    }
  SparseMatrix a(static_cast<int>(mesh.n_fine_dofs()), static_cast<int>(mesh.n_fine_dofs()));
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

namespace {

SparseMatrix assemble_scalar(const MeshHierarchy &mesh, const ScalarElementMatrix &ke) {
  std::vector<Triplet> trips;
  trips.reserve(mesh.n_fine_cells() * kCellNodes * kCellNodes);
  for (int y = 0; y < mesh.n_fine(); ++y)
    for (int x = 0; x < mesh.n_fine(); ++x) {
      const auto nodes = mesh.fine_cell_nodes({x, y});
      for (int i = 0; i < kCellNodes; ++i)
        for (int j = 0; j < kCellNodes; ++j)
          trips.emplace_back(static_cast<int>(nodes[i]), static_cast<int>(nodes[j]), ke(i, j));
    }
  const int n = static_cast<int>(mesh.n_fine_nodes());
  SparseMatrix m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

}  // namespace

SparseMatrix assemble_scalar_mass(const MeshHierarchy &mesh) {
  return assemble_scalar(mesh, element_mass(mesh.fine_size(0), mesh.fine_size(1)));
}

SparseMatrix assemble_scalar_laplace(const MeshHierarchy &mesh) {
  return assemble_scalar(mesh, element_laplace(mesh.fine_size(0), mesh.fine_size(1)));
}

SparseMatrix restrict_matrix(const SparseMatrix &a, std::span<const std::size_t> rows,
                             std::span<const std::size_t> cols) {
  std::vector<int> row_map(a.rows(), -1), col_map(a.cols(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) row_map[rows[i]] = static_cast<int>(i);
  for (std::size_t j = 0; j < cols.size(); ++j) col_map[cols[j]] = static_cast<int>(j);
  std::vector<Triplet> trips;
  for (int c = 0; c < a.outerSize(); ++c) {
    if (col_map[c] < 0) continue;
    for (SparseMatrix::InnerIterator it(a, c); it; ++it)
      if (row_map[it.row()] >= 0) trips.emplace_back(row_map[it.row()], col_map[c], it.value());
  }
  SparseMatrix r(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  r.setFromTriplets(trips.begin(), trips.end());
  return r;
}

SparseMatrix assemble_patch_stiffness(const MeshHierarchy &mesh, const Patch &patch,
                                      const CoefficientField &field, bool constrained) {
  if (!field.resolved_by(mesh))
    throw std::invalid_argument("fine mesh does not resolve the coefficient grid");
  const StiffnessSplit split(mesh.fine_size(0), mesh.fine_size(1));
  const std::size_t nn = patch.n_nodes();
  std::vector<Triplet> trips;
  trips.reserve(patch.fine_cells.size() * kElementDofs * kElementDofs);
  for (auto cell_id : patch.fine_cells) {
    const Index2 c = mesh.fine_cell_coords(cell_id);
    const auto ke = split(field.on_fine_cell(mesh, c));
    const std::array<std::size_t, kCellNodes> local{
        patch.local_node({c[0], c[1]}), patch.local_node({c[0] + 1, c[1]}),
        patch.local_node({c[0], c[1] + 1}), patch.local_node({c[0] + 1, c[1] + 1})};
    for (int i = 0; i < kElementDofs; ++i)
      for (int j = 0; j < kElementDofs; ++j)
        trips.emplace_back(static_cast<int>((i / kCellNodes) * nn + local[i % kCellNodes]),
                           static_cast<int>((j / kCellNodes) * nn + local[j % kCellNodes]), ke(i, j));
  }
  SparseMatrix a(static_cast<int>(patch.n_dofs()), static_cast<int>(patch.n_dofs()));
  a.setFromTriplets(trips.begin(), trips.end());
  if (!constrained) return a;
  return restrict_matrix(a, patch.interior_dofs, patch.interior_dofs);
}

ProjectionOperator assemble_projection(const MeshHierarchy &mesh, const Patch &patch) {
  ProjectionOperator p;
  p.cell_measure = mesh.coarse_cell_measure();
  p.n_cells = patch.n_cells();
  const double w = mesh.fine_cell_measure() / kCellNodes / p.cell_measure;
  const std::size_t nn = patch.n_nodes();
  std::vector<Triplet> trips;
  for (std::size_t q = 0; q < patch.n_cells(); ++q) {
    for (auto cell_id : mesh.fine_cells_of_coarse(patch.coarse_cells[q])) {
      const Index2 c = mesh.fine_cell_coords(cell_id);
      const std::array<std::size_t, kCellNodes> local{
          patch.local_node({c[0], c[1]}), patch.local_node({c[0] + 1, c[1]}),
          patch.local_node({c[0], c[1] + 1}), patch.local_node({c[0] + 1, c[1] + 1})};
      for (int k = 0; k < kDim; ++k)
        for (auto n : local)
          trips.emplace_back(static_cast<int>(k * p.n_cells + q), static_cast<int>(k * nn + n), w);
    }
  }
  p.means.resize(static_cast<int>(kDim * p.n_cells), static_cast<int>(patch.n_dofs()));
  p.means.setFromTriplets(trips.begin(), trips.end());
  return p;
}

ProjectionOperator assemble_projection(const MeshHierarchy &mesh) {
  ProjectionOperator p;
  p.cell_measure = mesh.coarse_cell_measure();
  p.n_cells = mesh.n_coarse_cells();
  const double w = mesh.fine_cell_measure() / kCellNodes / p.cell_measure;
  const std::size_t nn = mesh.n_fine_nodes();
  std::vector<Triplet> trips;
  for (int y = 0; y < mesh.n_fine(); ++y)
    for (int x = 0; x < mesh.n_fine(); ++x) {
      const std::size_t t = mesh.coarse_cell_of_fine({x, y});
      for (auto n : mesh.fine_cell_nodes({x, y}))
        for (int k = 0; k < kDim; ++k)
          trips.emplace_back(static_cast<int>(k * p.n_cells + t), static_cast<int>(k * nn + n), w);
    }
  p.means.resize(static_cast<int>(kDim * p.n_cells), static_cast<int>(mesh.n_fine_dofs()));
  p.means.setFromTriplets(trips.begin(), trips.end());
  return p;
}

namespace {

template <typename DofOf>
void add_cell_load(const MeshHierarchy &mesh, const RhsField &rhs, Index2 c, const QuadratureRule &rule,
                   Vector &load, DofOf dof_of) {
  const double hx = mesh.fine_size(0), hy = mesh.fine_size(1);
  const auto origin = mesh.node_point(c);
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const auto &pt = rule.points[q];
    const auto f = rhs(origin[0] + pt[0] * hx, origin[1] + pt[1] * hy);
    const auto n = q1_values(pt[0], pt[1]);
    const double w = rule.weights[q] * hx * hy;
    for (int k = 0; k < kDim; ++k)
      for (int v = 0; v < kCellNodes; ++v) load[dof_of(k, v)] += w * f[k] * n[v];
  }
}

}  // namespace

Vector assemble_load(const MeshHierarchy &mesh, const RhsField &rhs) {
  Vector load = Vector::Zero(static_cast<int>(mesh.n_fine_dofs()));
  const auto rule = QuadratureRule::gauss(2);
  const std::size_t nn = mesh.n_fine_nodes();
  for (int y = 0; y < mesh.n_fine(); ++y)
    for (int x = 0; x < mesh.n_fine(); ++x) {
      const auto nodes = mesh.fine_cell_nodes({x, y});
      add_cell_load(mesh, rhs, {x, y}, rule, load,
                    [&](int k, int v) { return static_cast<Eigen::Index>(k * nn + nodes[v]); });
    }
  return load;
}

Vector assemble_load(const MeshHierarchy &mesh, const Patch &patch, const RhsField &rhs) {
  Vector load = Vector::Zero(static_cast<int>(patch.n_dofs()));
  const auto rule = QuadratureRule::gauss(2);
  const std::size_t nn = patch.n_nodes();
  for (auto cell_id : patch.fine_cells) {
    const Index2 c = mesh.fine_cell_coords(cell_id);
    const std::array<std::size_t, kCellNodes> local{
        patch.local_node({c[0], c[1]}), patch.local_node({c[0] + 1, c[1]}),
        patch.local_node({c[0], c[1] + 1}), patch.local_node({c[0] + 1, c[1] + 1})};
    add_cell_load(mesh, rhs, c, rule, load,
                  [&](int k, int v) { return static_cast<Eigen::Index>(k * nn + local[v]); });
  }
  return load;
}

FineSolution solve_fine_reference(const MeshHierarchy &mesh, const SparseMatrix &stiffness,
                                  const Vector &load) {
  const auto free = mesh.free_dofs();
  const SparseMatrix a = restrict_matrix(stiffness, free, free);
  Vector b(static_cast<int>(free.size()));
  for (std::size_t i = 0; i < free.size(); ++i) b[i] = load[free[i]];

  FineSolution out;
  out.displacement = Vector::Zero(static_cast<int>(mesh.n_fine_dofs()));
  if (free.empty() || b.norm() == 0.0) return out;

  Eigen::SimplicialLDLT<SparseMatrix> solver(a);
  if (solver.info() != Eigen::Success) throw std::runtime_error("fine stiffness factorization failed");
  const Vector x = solver.solve(b);
  out.relative_residual = (a * x - b).norm() / b.norm();
  if (!(out.relative_residual <= 1e-10))
    throw std::runtime_error("fine solve residual " + std::to_string(out.relative_residual) +
                             " exceeds 1e-10");
  for (std::size_t i = 0; i < free.size(); ++i) out.displacement[free[i]] = x[i];
  return out;
}

FineSolution solve_fine_reference(const MeshHierarchy &mesh, const CoefficientField &field,
                                  const RhsField &rhs) {
  return solve_fine_reference(mesh, assemble_stiffness(mesh, field), assemble_load(mesh, rhs));
}

NormEvaluator::NormEvaluator(const MeshHierarchy &mesh, const CoefficientField &field)
    : NormEvaluator(mesh, assemble_stiffness(mesh, field)) {}

NormEvaluator::NormEvaluator(const MeshHierarchy &mesh, SparseMatrix stiffness)
    : n_nodes_(mesh.n_fine_nodes()),
      mass_(assemble_scalar_mass(mesh)),
      laplace_(assemble_scalar_laplace(mesh)),
      stiffness_(std::move(stiffness)) {}

Norms NormEvaluator::operator()(const Vector &v) const {
  double l2 = 0.0, h1 = 0.0;
  const auto n = static_cast<Eigen::Index>(n_nodes_);
  for (int k = 0; k < kDim; ++k) {
    const auto vk = v.segment(k * n, n);
    l2 += vk.dot(mass_ * vk);
    h1 += vk.dot(laplace_ * vk);
  }
  const double e = v.dot(stiffness_ * v);
  return {std::sqrt(std::max(0.0, l2)), std::sqrt(std::max(0.0, h1)), std::sqrt(std::max(0.0, e))};
}

SparseMatrix prolongation(int n_from, int n_to) {
  if (n_from < 1 || n_to % n_from != 0)
    throw std::invalid_argument("prolongation needs nested grids");
  const int r = n_to / n_from;
  std::vector<Triplet> trips;
  for (int y = 0; y <= n_to; ++y)
    for (int x = 0; x <= n_to; ++x) {
      const int row = y * (n_to + 1) + x;
      const int cx = std::min(x / r, n_from - 1), cy = std::min(y / r, n_from - 1);
      const double tx = static_cast<double>(x - cx * r) / r, ty = static_cast<double>(y - cy * r) / r;
      const auto w = q1_values(tx, ty);
      const std::array<int, kCellNodes> nodes{cy * (n_from + 1) + cx, cy * (n_from + 1) + cx + 1,
                                              (cy + 1) * (n_from + 1) + cx,
                                              (cy + 1) * (n_from + 1) + cx + 1};
      for (int v = 0; v < kCellNodes; ++v)
        if (w[v] != 0.0) trips.emplace_back(row, nodes[v], w[v]);
    }
  SparseMatrix p((n_to + 1) * (n_to + 1), (n_from + 1) * (n_from + 1));
  p.setFromTriplets(trips.begin(), trips.end());
  return p;
}

Vector prolongate(const Vector &v, int n_from, int n_to) {
  const SparseMatrix p = prolongation(n_from, n_to);
  const auto nf = p.cols(), nt = p.rows();
  if (v.size() != kDim * nf) throw std::invalid_argument("vector size does not match the source grid");
  Vector out(kDim * nt);
  for (int k = 0; k < kDim; ++k) out.segment(k * nt, nt) = p * v.segment(k * nf, nf);
  return out;
}

void write_solution_csv(std::ostream &os, const MeshHierarchy &mesh, const Vector &u) {
  const std::size_t nn = mesh.n_fine_nodes();
  os << "x,y,u1,u2\n";
  os.precision(17);
  for (std::size_t n = 0; n < nn; ++n) {
    const auto p = mesh.node_point(mesh.fine_node_coords(n));
    os << p[0] << ',' << p[1] << ',' << u[n] << ',' << u[nn + n] << '\n';
  }
}

}  // namespace slod
