#include <doctest.h>

#include <algorithm>
#include <set>

#include "slod/mesh.hpp"

using namespace slod;

TEST_CASE("mesh sizes") {
  const MeshHierarchy m(8, 4);
  CHECK(m.n_fine() == 32);
  CHECK(m.n_coarse_cells() == 64);
  CHECK(m.coarse_size() == doctest::Approx(0.125));
  CHECK(m.fine_size() == doctest::Approx(1.0 / 32));

  const MeshHierarchy one(1, 1);
  CHECK(one.n_coarse_cells() == 1);
  CHECK(one.n_fine_cells() == 1);
  CHECK(one.n_fine_nodes() == 4);
  CHECK(one.fine_cells_of_coarse(0) == std::vector<std::size_t>{0});

  const MeshHierarchy ref(8, 32);
  CHECK(ref.fine_size() == doctest::Approx(1.0 / 256));

  CHECK_THROWS_AS(MeshHierarchy(0, 4), std::invalid_argument);
  CHECK_THROWS_AS(MeshHierarchy(4, 0), std::invalid_argument);
}

TEST_CASE("index maps round-trip") {
  const MeshHierarchy m(3, 2);
  for (std::size_t id = 0; id < m.n_fine_nodes(); ++id) CHECK(m.fine_node_id(m.fine_node_coords(id)) == id);
  for (std::size_t id = 0; id < m.n_fine_cells(); ++id) {
    const auto c = m.fine_cell_coords(id);
    CHECK(m.fine_cell_id(c) == id);
    CHECK(m.coarse_cell_of_fine(c) == m.coarse_cell_id({c[0] / 2, c[1] / 2}));
  }
  const auto nodes = m.fine_cell_nodes({1, 2});
  CHECK(nodes[0] == m.fine_node_id({1, 2}));
  CHECK(nodes[1] == m.fine_node_id({2, 2}));
  CHECK(nodes[2] == m.fine_node_id({1, 3}));
  CHECK(nodes[3] == m.fine_node_id({2, 3}));
  CHECK(m.free_dofs().size() == 2 * 5 * 5);
}

TEST_CASE("patch sizes and clipping") {
  const MeshHierarchy m(8, 2);
  CHECK(build_patch(m, m.coarse_cell_id({3, 4}), 1).n_cells() == 9);
  CHECK(build_patch(m, 0, 2).n_cells() == 9);
  const Patch whole = build_patch(m, m.coarse_cell_id({5, 2}), 8);
  CHECK(whole.n_cells() == 64);
  CHECK(whole.sigma_dofs.empty());
  CHECK(whole.covers_domain(m));
  const Patch zero = build_patch(m, 10, 0);
  CHECK(zero.coarse_cells == std::vector<std::size_t>{10});
}

TEST_CASE("patch cover index") {
  const MeshHierarchy m(8, 1);
  const auto cover = patch_cover_index(m, 1);
  CHECK(cover[m.coarse_cell_id({4, 4})].size() == 9);
  CHECK(cover[0].size() == 4);
  const MeshHierarchy m16(16, 1);
  CHECK(patch_cover_index(m16, 2)[m16.coarse_cell_id({7, 9})].size() == 25);

  // consistency with the patches themselves
  for (std::size_t t = 0; t < m.n_coarse_cells(); ++t) {
    const Patch p = build_patch(m, t, 1);
    for (auto c : p.coarse_cells) {
      const auto &cv = cover[c];
      CHECK(std::find(cv.begin(), cv.end(), t) != cv.end());
    }
  }
}

TEST_CASE("patch invariants") {
  const MeshHierarchy m(6, 3);
  for (std::size_t t = 0; t < m.n_coarse_cells(); ++t)
    for (int order = 0; order < 4; ++order) {
      const Patch p = build_patch(m, t, order);
      const Patch q = build_patch(m, t, order + 1);
      CHECK(std::includes(q.coarse_cells.begin(), q.coarse_cells.end(), p.coarse_cells.begin(),
                          p.coarse_cells.end()));

      // interior, Sigma and Dirichlet DOFs partition the patch DOFs
      std::vector<int> seen(p.n_dofs(), 0);
      for (auto d : p.interior_dofs) ++seen[d];
      for (auto d : p.sigma_dofs) ++seen[d];
      for (auto n : p.dirichlet_nodes)
        for (int k = 0; k < kDim; ++k) ++seen[k * p.n_nodes() + n];
      CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));

      for (auto n : p.dirichlet_nodes) CHECK(m.node_on_boundary(m.fine_node_coords(p.nodes[n])));
      for (auto n : p.sigma_nodes) CHECK_FALSE(m.node_on_boundary(m.fine_node_coords(p.nodes[n])));

      const Patch again = build_patch(m, t, order);
      CHECK(again.interior_dofs == p.interior_dofs);
      CHECK(again.sigma_dofs == p.sigma_dofs);
      CHECK(again.nodes == p.nodes);
    }
  // interior cells of equal order have equal patch size
  CHECK(build_patch(m, m.coarse_cell_id({2, 2}), 1).n_cells() == build_patch(m, m.coarse_cell_id({3, 3}), 1).n_cells());
}

TEST_CASE("patch local maps") {
  const MeshHierarchy m(5, 2);
  const Patch p = build_patch(m, m.coarse_cell_id({1, 3}), 1);
  for (std::size_t q = 0; q < p.n_cells(); ++q) CHECK(p.local_cell(p.coarse_cells[q]) == static_cast<int>(q));
  CHECK(p.local_cell(m.coarse_cell_id({4, 0})) == -1);
  const auto all = p.all_global_dofs(m);
  const auto interior = p.interior_global_dofs(m);
  for (std::size_t i = 0; i < p.interior_dofs.size(); ++i) CHECK(interior[i] == all[p.interior_dofs[i]]);
  std::set<std::size_t> unique(all.begin(), all.end());
  CHECK(unique.size() == all.size());
}
