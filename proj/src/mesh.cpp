#include "slod/mesh.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace slod {

MeshHierarchy::MeshHierarchy(int n_coarse, int refinement_ratio, Box domain)
    : n_coarse_(n_coarse), ratio_(refinement_ratio), domain_(domain) {
  if (n_coarse < 1)
    throw std::invalid_argument("n_coarse must be positive, got " + std::to_string(n_coarse));
  if (refinement_ratio < 1)
    throw std::invalid_argument("refinement_ratio must be positive, got " +
                                std::to_string(refinement_ratio));
  for (int a = 0; a < kDim; ++a)
    if (!(domain.upper[a] > domain.lower[a]))
      throw std::invalid_argument("degenerate domain box");
}

double MeshHierarchy::coarse_size(int axis) const {
  return (domain_.upper[axis] - domain_.lower[axis]) / n_coarse_;
}

double MeshHierarchy::fine_size(int axis) const {
  return (domain_.upper[axis] - domain_.lower[axis]) / n_fine();
}

double MeshHierarchy::coarse_cell_measure() const {
  double v = 1.0;
  for (int a = 0; a < kDim; ++a) v *= coarse_size(a);
  return v;
}

double MeshHierarchy::fine_cell_measure() const {
  double v = 1.0;
  for (int a = 0; a < kDim; ++a) v *= fine_size(a);
  return v;
}

std::size_t MeshHierarchy::n_coarse_cells() const {
  return static_cast<std::size_t>(n_coarse_) * n_coarse_;
}

std::size_t MeshHierarchy::n_fine_cells() const {
  return static_cast<std::size_t>(n_fine()) * n_fine();
}

std::size_t MeshHierarchy::n_fine_nodes() const {
  const auto n = static_cast<std::size_t>(n_fine() + 1);
  return n * n;
}

std::size_t MeshHierarchy::coarse_cell_id(Index2 c) const {
  return static_cast<std::size_t>(c[1]) * n_coarse_ + c[0];
}

Index2 MeshHierarchy::coarse_cell_coords(std::size_t id) const {
  return {static_cast<int>(id % n_coarse_), static_cast<int>(id / n_coarse_)};
}

std::size_t MeshHierarchy::fine_cell_id(Index2 c) const {
  return static_cast<std::size_t>(c[1]) * n_fine() + c[0];
}

Index2 MeshHierarchy::fine_cell_coords(std::size_t id) const {
  const auto n = static_cast<std::size_t>(n_fine());
  return {static_cast<int>(id % n), static_cast<int>(id / n)};
}

std::size_t MeshHierarchy::fine_node_id(Index2 n) const {
  return static_cast<std::size_t>(n[1]) * (n_fine() + 1) + n[0];
}

Index2 MeshHierarchy::fine_node_coords(std::size_t id) const {
  const auto n = static_cast<std::size_t>(n_fine() + 1);
  return {static_cast<int>(id % n), static_cast<int>(id / n)};
}

std::array<double, kDim> MeshHierarchy::node_point(Index2 n) const {
  std::array<double, kDim> p{};
  for (int a = 0; a < kDim; ++a) p[a] = domain_.lower[a] + n[a] * fine_size(a);
  return p;
}

bool MeshHierarchy::node_on_boundary(Index2 n) const {
  for (int a = 0; a < kDim; ++a)
    if (n[a] == 0 || n[a] == n_fine()) return true;
  return false;
}

std::array<std::size_t, kCellNodes> MeshHierarchy::fine_cell_nodes(Index2 cell) const {
  const int x = cell[0], y = cell[1];
  return {fine_node_id({x, y}), fine_node_id({x + 1, y}), fine_node_id({x, y + 1}),
          fine_node_id({x + 1, y + 1})};
}

std::size_t MeshHierarchy::coarse_cell_of_fine(Index2 fine_cell) const {
  return coarse_cell_id({fine_cell[0] / ratio_, fine_cell[1] / ratio_});
}

std::vector<std::size_t> MeshHierarchy::fine_cells_of_coarse(std::size_t coarse_id) const {
  const Index2 c = coarse_cell_coords(coarse_id);
  std::vector<std::size_t> cells;
  cells.reserve(static_cast<std::size_t>(ratio_) * ratio_);
  for (int y = c[1] * ratio_; y < (c[1] + 1) * ratio_; ++y)
    for (int x = c[0] * ratio_; x < (c[0] + 1) * ratio_; ++x) cells.push_back(fine_cell_id({x, y}));
  return cells;
}

std::vector<std::size_t> MeshHierarchy::free_dofs() const {
  std::vector<std::size_t> dofs;
  const std::size_t nn = n_fine_nodes();
  for (int k = 0; k < kDim; ++k)
    for (int y = 1; y < n_fine(); ++y)
      for (int x = 1; x < n_fine(); ++x) dofs.push_back(k * nn + fine_node_id({x, y}));
  return dofs;
}

int Patch::local_cell(std::size_t coarse_id) const {
  const auto it = std::lower_bound(coarse_cells.begin(), coarse_cells.end(), coarse_id);
  if (it == coarse_cells.end() || *it != coarse_id) return -1;
  return static_cast<int>(it - coarse_cells.begin());
}

std::size_t Patch::local_node(Index2 node) const {
  const int width = node_hi[0] - node_lo[0] + 1;
  return static_cast<std::size_t>(node[1] - node_lo[1]) * width + (node[0] - node_lo[0]);
}

std::size_t Patch::global_dof(const MeshHierarchy &mesh, std::size_t local_dof) const {
  const std::size_t k = local_dof / n_nodes();
  const std::size_t node = local_dof % n_nodes();
  return k * mesh.n_fine_nodes() + nodes[node];
}

std::vector<std::size_t> Patch::interior_global_dofs(const MeshHierarchy &mesh) const {
  std::vector<std::size_t> out;
  out.reserve(interior_dofs.size());
  for (auto d : interior_dofs) out.push_back(global_dof(mesh, d));
  return out;
}

std::vector<std::size_t> Patch::all_global_dofs(const MeshHierarchy &mesh) const {
  std::vector<std::size_t> out(n_dofs());
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = global_dof(mesh, d);
  return out;
}

bool Patch::covers_domain(const MeshHierarchy &mesh) const {
  return coarse_cells.size() == mesh.n_coarse_cells();
}

Patch build_patch(const MeshHierarchy &mesh, std::size_t center_cell, int order) {
  if (order < 0) throw std::invalid_argument("patch order must be non-negative");
  if (center_cell >= mesh.n_coarse_cells())
    throw std::out_of_range("coarse cell " + std::to_string(center_cell) + " out of range");

  Patch p;
  p.center_cell = center_cell;
  p.order = order;
  const Index2 c = mesh.coarse_cell_coords(center_cell);
  const int r = mesh.refinement_ratio();
  for (int a = 0; a < kDim; ++a) {
    p.cell_lo[a] = std::max(0, c[a] - order);
    p.cell_hi[a] = std::min(mesh.n_coarse() - 1, c[a] + order);
    p.node_lo[a] = p.cell_lo[a] * r;
    p.node_hi[a] = (p.cell_hi[a] + 1) * r;
  }

  for (int y = p.cell_lo[1]; y <= p.cell_hi[1]; ++y)
    for (int x = p.cell_lo[0]; x <= p.cell_hi[0]; ++x) p.coarse_cells.push_back(mesh.coarse_cell_id({x, y}));
  for (int y = p.node_lo[1]; y < p.node_hi[1]; ++y)
    for (int x = p.node_lo[0]; x < p.node_hi[0]; ++x) p.fine_cells.push_back(mesh.fine_cell_id({x, y}));

  for (int y = p.node_lo[1]; y <= p.node_hi[1]; ++y) {
    for (int x = p.node_lo[0]; x <= p.node_hi[0]; ++x) {
      const Index2 n{x, y};
      const std::size_t local = p.nodes.size();
      p.nodes.push_back(mesh.fine_node_id(n));
      const bool on_patch_boundary =
          x == p.node_lo[0] || x == p.node_hi[0] || y == p.node_lo[1] || y == p.node_hi[1];
      if (!on_patch_boundary)
        p.interior_nodes.push_back(local);
      else if (mesh.node_on_boundary(n))
        p.dirichlet_nodes.push_back(local);
      else
        p.sigma_nodes.push_back(local);
    }
  }

  const std::size_t nn = p.nodes.size();
  for (int k = 0; k < kDim; ++k) {
    for (auto n : p.interior_nodes) p.interior_dofs.push_back(k * nn + n);
  }
  for (int k = 0; k < kDim; ++k) {
    for (auto n : p.sigma_nodes) p.sigma_dofs.push_back(k * nn + n);
  }
  return p;
}

std::vector<std::vector<std::size_t>> patch_cover_index(const MeshHierarchy &mesh, int order) {
  std::vector<std::vector<std::size_t>> cover(mesh.n_coarse_cells());
  // Chebyshev patches are symmetric: T lies in the patch of T' iff T' lies in the patch of T.
  for (std::size_t t = 0; t < mesh.n_coarse_cells(); ++t) {
    const Index2 c = mesh.coarse_cell_coords(t);
    for (int y = std::max(0, c[1] - order); y <= std::min(mesh.n_coarse() - 1, c[1] + order); ++y)
      for (int x = std::max(0, c[0] - order); x <= std::min(mesh.n_coarse() - 1, c[0] + order); ++x)
        cover[t].push_back(mesh.coarse_cell_id({x, y}));
  }
  return cover;
}

}  // namespace slod
