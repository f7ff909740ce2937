#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace slod {

/// Spatial dimension. Index formulas below are written against it so that a
/// 3D hierarchy only needs a third axis in the maps, not new formulas.
inline constexpr int kDim = 2;

/// Nodes of a Q1 cell in lexicographic order: (0,0), (1,0), (0,1), (1,1).
inline constexpr int kCellNodes = 4;

struct Box {
  std::array<double, kDim> lower{0.0, 0.0};
  std::array<double, kDim> upper{1.0, 1.0};
};

using Index2 = std::array<int, kDim>;

/// Nested Cartesian coarse/fine meshes over an axis-aligned box.
///
/// Coarse cells, fine cells and fine nodes are numbered lexicographically with
/// x running fastest. Vector-valued fine DOFs are component-major:
/// dof = k * n_fine_nodes() + node.
class MeshHierarchy {
 public:
  MeshHierarchy(int n_coarse, int refinement_ratio, Box domain = {});

  int n_coarse() const { return n_coarse_; }
  int refinement_ratio() const { return ratio_; }
  int n_fine() const { return n_coarse_ * ratio_; }
  const Box &domain() const { return domain_; }

  double coarse_size(int axis = 0) const;
  double fine_size(int axis = 0) const;
  double coarse_cell_measure() const;
  double fine_cell_measure() const;

  std::size_t n_coarse_cells() const;
  std::size_t n_fine_cells() const;
  std::size_t n_fine_nodes() const;
  std::size_t n_fine_dofs() const { return kDim * n_fine_nodes(); }
  std::size_t n_coarse_dofs() const { return kDim * n_coarse_cells(); }

  std::size_t coarse_cell_id(Index2 c) const;
  Index2 coarse_cell_coords(std::size_t id) const;
  std::size_t fine_cell_id(Index2 c) const;
  Index2 fine_cell_coords(std::size_t id) const;
  std::size_t fine_node_id(Index2 n) const;
  Index2 fine_node_coords(std::size_t id) const;

  std::array<double, kDim> node_point(Index2 n) const;
  bool node_on_boundary(Index2 n) const;

  /// Global node ids of a fine cell in lexicographic vertex order.
  std::array<std::size_t, kCellNodes> fine_cell_nodes(Index2 cell) const;

  /// Coarse cell containing a fine cell.
  std::size_t coarse_cell_of_fine(Index2 fine_cell) const;

  /// Fine cells that make up a coarse cell, lexicographic.
  std::vector<std::size_t> fine_cells_of_coarse(std::size_t coarse_id) const;

  /// Global vector DOFs at nodes strictly inside the domain (the free DOFs of
  /// the homogeneous Dirichlet problem), component-major.
  std::vector<std::size_t> free_dofs() const;

 private:
  int n_coarse_;
  int ratio_;
  Box domain_;
};

/// Oversampling patch of order m: all coarse cells within Chebyshev distance
/// m of the center cell, clipped at the domain boundary.
///
/// Local node numbering is lexicographic over the patch's fine-node
/// rectangle; local vector DOFs are k * n_nodes() + local_node. Interior DOFs
/// and Sigma DOFs are component-major over their own node lists, so the Sigma
/// row index is s * n_sigma + p.
struct Patch {
  std::size_t center_cell = 0;
  int order = 0;
  Index2 cell_lo{};  // inclusive coarse index range
  Index2 cell_hi{};
  Index2 node_lo{};  // inclusive fine node index range
  Index2 node_hi{};

  std::vector<std::size_t> coarse_cells;  // global ids, lexicographic
  std::vector<std::size_t> fine_cells;    // global ids, lexicographic
  std::vector<std::size_t> nodes;         // local node -> global node

  std::vector<std::size_t> interior_nodes;   // local ids, not on the patch boundary
  std::vector<std::size_t> sigma_nodes;      // local ids on the patch boundary away from the domain boundary
  std::vector<std::size_t> dirichlet_nodes;  // local ids on the patch boundary and the domain boundary

  std::vector<std::size_t> interior_dofs;  // local dof ids, component-major
  std::vector<std::size_t> sigma_dofs;     // local dof ids, component-major

  std::size_t n_nodes() const { return nodes.size(); }
  std::size_t n_dofs() const { return kDim * nodes.size(); }
  std::size_t n_cells() const { return coarse_cells.size(); }
  std::size_t n_interior_dofs() const { return interior_dofs.size(); }
  std::size_t n_sigma_nodes() const { return sigma_nodes.size(); }

  /// Local index q of a global coarse cell inside the patch, or -1.
  int local_cell(std::size_t coarse_id) const;
  /// Local node id of a global fine node index pair (must lie in the patch).
  std::size_t local_node(Index2 node) const;

  std::size_t global_dof(const MeshHierarchy &mesh, std::size_t local_dof) const;

  /// Global DOF for every interior DOF, in interior order.
  std::vector<std::size_t> interior_global_dofs(const MeshHierarchy &mesh) const;
  /// Global DOF for every patch DOF, in local order.
  std::vector<std::size_t> all_global_dofs(const MeshHierarchy &mesh) const;

  bool covers_domain(const MeshHierarchy &mesh) const;
};

Patch build_patch(const MeshHierarchy &mesh, std::size_t center_cell, int order);

/// For every coarse cell, the centers of all order-m patches containing it.
std::vector<std::vector<std::size_t>> patch_cover_index(const MeshHierarchy &mesh, int order);

}  // namespace slod
