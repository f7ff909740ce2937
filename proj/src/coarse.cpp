#include "slod/coarse.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "slod/parallel.hpp"

namespace slod {

std::vector<LocalBasis> build_bases(const MeshHierarchy &mesh, const CoefficientField &field,
                                    const BasisBuildOptions &options) {
  if (!field.resolved_by(mesh))
    throw std::invalid_argument("fine mesh does not resolve the coefficient grid");
  const std::size_t nh = mesh.n_coarse_cells();
  std::vector<LocalBasis> bases(kDim * nh);
  parallel_for(nh, options.threads, [&](std::size_t t) {
    auto patch = std::make_shared<const Patch>(build_patch(mesh, t, options.oversampling));
    const PatchOperators ops = build_patch_operators(mesh, patch, field);
    const auto q = static_cast<std::size_t>(patch->local_cell(t));
    if (options.flavor == BasisFlavor::lod) {
      for (int k = 0; k < kDim; ++k) bases[k * nh + t] = lod_basis(ops, q, k);
      return;
    }
    const Matrix boundary = assemble_boundary_matrix(ops);
    for (int k = 0; k < kDim; ++k)
      bases[k * nh + t] = superlocalize(ops, boundary, q, k, options.superlocalization);
  });
  return bases;
}

namespace {

using GlobalDofs = std::vector<Eigen::Index>;

std::vector<std::shared_ptr<const GlobalDofs>> interior_maps(const MeshHierarchy &mesh,
                                                             const std::vector<LocalBasis> &bases) {
  std::map<const Patch *, std::shared_ptr<const GlobalDofs>> cache;
  std::vector<std::shared_ptr<const GlobalDofs>> maps;
  maps.reserve(bases.size());
  for (const auto &b : bases) {
    auto &slot = cache[b.patch.get()];
    if (!slot) {
      auto g = std::make_shared<GlobalDofs>();
      for (auto d : b.patch->interior_dofs)
        g->push_back(static_cast<Eigen::Index>(b.patch->global_dof(mesh, d)));
      slot = g;
    }
    maps.push_back(slot);
  }
  return maps;
}

}  // namespace

CoarseSystem assemble_coarse(const MeshHierarchy &mesh, std::vector<LocalBasis> bases,
                             const Vector &fine_load, unsigned threads) {
  const std::size_t n = bases.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto &b = bases[i];
    if (!b.patch || b.values.size() != static_cast<Eigen::Index>(b.patch->n_interior_dofs()) ||
        b.applied.size() != static_cast<Eigen::Index>(b.patch->n_dofs()))
      throw std::invalid_argument("basis " + std::to_string(i) + " does not match its patch numbering");
    if (b.patch->nodes.back() >= mesh.n_fine_nodes())
      throw std::invalid_argument("basis " + std::to_string(i) + " was built on a different fine mesh");
  }
  const auto maps = interior_maps(mesh, bases);

  // Bases whose patches share a coarse cell.
  std::vector<std::vector<std::size_t>> cover(mesh.n_coarse_cells());
  for (std::size_t i = 0; i < n; ++i)
    for (auto c : bases[i].patch->coarse_cells) cover[c].push_back(i);

  std::vector<std::vector<Eigen::Triplet<double>>> rows(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto &bi = bases[i];
    std::vector<std::size_t> neighbours;
    for (auto c : bi.patch->coarse_cells) neighbours.insert(neighbours.end(), cover[c].begin(), cover[c].end());
    std::sort(neighbours.begin(), neighbours.end());
    neighbours.erase(std::unique(neighbours.begin(), neighbours.end()), neighbours.end());

    // applied_i scattered to global numbering, restricted to what neighbours can see.
    std::map<Eigen::Index, double> applied;
    const auto all = bi.patch->all_global_dofs(mesh);
    for (std::size_t d = 0; d < all.size(); ++d) applied[static_cast<Eigen::Index>(all[d])] = bi.applied[d];

    for (auto j : neighbours) {
      const auto &bj = bases[j];
      const auto &gj = *maps[j];
      double v = 0.0;
      for (std::size_t l = 0; l < gj.size(); ++l) {
        const auto it = applied.find(gj[l]);
        if (it != applied.end()) v += it->second * bj.values[l];
      }
      rows[i].emplace_back(static_cast<int>(i), static_cast<int>(j), v);
    }
  });

  CoarseSystem sys;
  std::vector<Eigen::Triplet<double>> trips;
  for (auto &r : rows) trips.insert(trips.end(), r.begin(), r.end());
  sys.stiffness.resize(static_cast<int>(n), static_cast<int>(n));
  sys.stiffness.setFromTriplets(trips.begin(), trips.end());

  sys.load.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    const auto &g = *maps[i];
    for (std::size_t l = 0; l < g.size(); ++l) v += bases[i].values[l] * fine_load[g[l]];
    sys.load[static_cast<Eigen::Index>(i)] = v;
  }
  sys.bases = std::move(bases);
  return sys;
}

Vector reconstruct(const MeshHierarchy &mesh, const std::vector<LocalBasis> &bases, const Vector &coefficients) {
  Vector u = Vector::Zero(static_cast<Eigen::Index>(mesh.n_fine_dofs()));
  for (std::size_t i = 0; i < bases.size(); ++i) {
    const auto &b = bases[i];
    const double c = coefficients[static_cast<Eigen::Index>(i)];
    for (std::size_t l = 0; l < b.patch->interior_dofs.size(); ++l)
      u[static_cast<Eigen::Index>(b.patch->global_dof(mesh, b.patch->interior_dofs[l]))] += c * b.values[l];
  }
  return u;
}

void solve_coarse(const MeshHierarchy &mesh, CoarseSystem &system) {
  const auto n = system.stiffness.rows();
  system.coefficients = Vector::Zero(n);
  system.relative_residual = 0.0;
  if (system.load.norm() > 0.0) {
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower> llt(system.stiffness);
    if (llt.info() != Eigen::Success) throw std::runtime_error("coarse stiffness factorization failed");
    system.coefficients = llt.solve(system.load);
    const Vector r = system.stiffness.selfadjointView<Eigen::Lower>() * system.coefficients - system.load;
    system.relative_residual = r.norm() / system.load.norm();
    if (!(system.relative_residual <= 1e-10))
      throw std::runtime_error("coarse solve residual " + std::to_string(system.relative_residual) +
                               " exceeds 1e-10");
  }
  system.fine_solution = reconstruct(mesh, system.bases, system.coefficients);
}

Vector solve_coarse_fem(const MeshHierarchy &mesh, const SparseMatrix &fine_stiffness, const Vector &fine_load) {
  const int nc = mesh.n_coarse(), nf = mesh.n_fine();
  const SparseMatrix scalar = prolongation(nc, nf);
  const auto nfn = scalar.rows(), ncn = scalar.cols();

  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < kDim; ++k)
    for (int c = 0; c < scalar.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(scalar, c); it; ++it)
        trips.emplace_back(static_cast<int>(k * nfn + it.row()), static_cast<int>(k * ncn + c), it.value());
  SparseMatrix p(static_cast<int>(kDim * nfn), static_cast<int>(kDim * ncn));
  p.setFromTriplets(trips.begin(), trips.end());

  std::vector<std::size_t> free;
  for (int k = 0; k < kDim; ++k)
    for (int y = 1; y < nc; ++y)
      for (int x = 1; x < nc; ++x) free.push_back(k * ncn + y * (nc + 1) + x);

  Vector u = Vector::Zero(p.rows());
  if (free.empty()) return u;
  std::vector<std::size_t> all_cols(p.cols());
  for (std::size_t i = 0; i < all_cols.size(); ++i) all_cols[i] = i;
  std::vector<std::size_t> all_rows(p.rows());
  for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;
  const SparseMatrix pf = restrict_matrix(p, all_rows, free);
  const SparseMatrix a = SparseMatrix(pf.transpose()) * fine_stiffness * pf;
  const Vector b = pf.transpose() * fine_load;
  if (b.norm() == 0.0) return u;
  Eigen::SimplicialLDLT<SparseMatrix> solver(a);
  if (solver.info() != Eigen::Success) throw std::runtime_error("coarse FEM factorization failed");
  return pf * Vector(solver.solve(b));
}

Norms compute_errors(const Vector &reference, const Vector &approximation, const NormEvaluator &norms) {
  return norms(reference - approximation);
}

namespace {

Vector start_vector(Eigen::Index n) {
  SplitMix64 rng(0x5eed);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 0.5 + rng.uniform();
  return v.normalized();
}

}  // namespace

ConditionEstimate estimate_condition_number(const SparseMatrix &a, double tolerance, int max_iterations) {
  const SparseMatrix sym = a.selfadjointView<Eigen::Lower>();
  const auto n = sym.rows();
  ConditionEstimate est;
  if (n == 0) return est;

  const auto iterate = [&](auto &&apply, double &lambda) {
    Vector x = start_vector(n);
    lambda = 0.0;
    for (int it = 1; it <= max_iterations; ++it) {
      Vector y = apply(x);
      const double rq = x.dot(y);
      x = y.normalized();
      ++est.iterations;
      if (it > 1 && std::abs(rq - lambda) <= tolerance * std::abs(rq)) {
        lambda = rq;
        return;
      }
      lambda = rq;
    }
    est.approximate = true;
  };

  iterate([&](const Vector &x) { return Vector(sym * x); }, est.lambda_max);

  Eigen::SimplicialLLT<SparseMatrix> llt(sym);
  if (llt.info() != Eigen::Success) throw std::runtime_error("condition estimate: matrix is not SPD");
  double inv_max = 0.0;
  iterate([&](const Vector &x) { return Vector(llt.solve(x)); }, inv_max);
  est.lambda_min = 1.0 / inv_max;
  est.value = est.lambda_max / est.lambda_min;
  return est;
}

double companion_gram_diagnostic(const MeshHierarchy &mesh, const std::vector<LocalBasis> &bases) {
  const std::size_t nh = mesh.n_coarse_cells();
  Matrix c = Matrix::Zero(static_cast<Eigen::Index>(kDim * nh), static_cast<Eigen::Index>(bases.size()));
  for (std::size_t i = 0; i < bases.size(); ++i) {
    const auto &b = bases[i];
    const std::size_t ne = b.patch->n_cells();
    for (int k = 0; k < kDim; ++k)
      for (std::size_t q = 0; q < ne; ++q)
        c(static_cast<Eigen::Index>(k * nh + b.patch->coarse_cells[q]), static_cast<Eigen::Index>(i)) =
            b.companion[static_cast<Eigen::Index>(k * ne + q)];
  }
  const Matrix g = mesh.coarse_cell_measure() * (c.transpose() * c);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double max_boundary_residual(const std::vector<LocalBasis> &bases) {
  double m = 0.0;
  for (const auto &b : bases) m = std::max(m, b.boundary_residual);
  return m;
}

}  // namespace slod
