#pragma once

#include <memory>

#include "slod/fem.hpp"
#include "slod/mesh.hpp"

namespace slod {

enum class BasisFlavor { lod, slod };

/// One localized coarse basis function, stored on its patch.
struct LocalBasis {
  BasisFlavor flavor = BasisFlavor::lod;
  std::size_t cell = 0;  // owning coarse cell (global id)
  int component = 0;
  std::shared_ptr<const Patch> patch;

  Vector values;     // coefficients on patch.interior_dofs; zero on the patch boundary
  Vector companion;  // Q0 companion over (k * n_cells + q) of the patch
  Vector applied;    // unconstrained patch stiffness times values, all patch DOFs
  double energy_norm = 0.0;     // of the stored function
  double candidate_norm = 0.0;  // before normalization

  // Superlocalization record (SLOD only).
  int numerical_rank = 0;
  int stabilization_rank = 0;
  double residual_full = 0.0;        // t for the full-rank correction
  double residual_stabilized = 0.0;  // t for the accepted correction
  double boundary_residual = 0.0;    // |B companion| of the stored (possibly normalized) function
  double deviation = 0.0;            // stability deviation of the accepted candidate

  /// Global index k N_H + q.
  std::size_t global_index(const MeshHierarchy &mesh) const {
    return component * mesh.n_coarse_cells() + cell;
  }
};

/// Zero-extends the basis to a global fine vector.
Vector to_global(const MeshHierarchy &mesh, const LocalBasis &basis);

}  // namespace slod
