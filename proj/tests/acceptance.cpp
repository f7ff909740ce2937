// One PASS/FAIL line per acceptance criterion. Exit code is the number of failures.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "slod/coarse.hpp"
#include "slod/experiment.hpp"
#include "slod/lod_basis.hpp"
#include "slod/slod_basis.hpp"

using namespace slod;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "slod_acceptance";

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// detail lines accumulate; any failed check flips the outcome
struct Report {
  Outcome out;
  void check(bool ok, const std::string &what) {
    if (!ok) out.pass = false;
    if (!out.detail.empty()) out.detail += "; ";
    out.detail += (ok ? "" : "FAILED ") + what;
  }
};

RunConfig base_config(const std::string &name) {
  RunConfig c;
  c.output_dir = kWork / name;
  c.refinement_ratio = 4;
  c.n_coarse = {4, 8, 16};
  c.kappa = false;
  return c;
}

RunConfig random_config(const std::string &name) {
  RunConfig c = base_config(name);
  c.field = "random";
  c.eta_cells = 16;
  c.range = {1.0, 100.0};
  c.seed = 2024;
  return c;
}

std::vector<const ResultRow *> select(const ExperimentResult &r, const std::string &method, int m = -1) {
  std::vector<const ResultRow *> out;
  for (const auto &row : r.rows)
    if (row.method == method && (m < 0 || row.m == m)) out.push_back(&row);
  return out;
}

const ResultRow &find(const ExperimentResult &r, const std::string &method, int n, int m) {
  for (const auto &row : r.rows)
    if (row.method == method && row.n_coarse == n && row.m == m) return row;
  throw std::runtime_error("missing row " + method + " n=" + std::to_string(n) + " m=" + std::to_string(m));
}

double rate(const std::vector<const ResultRow *> &rows, double Norms::*member) {
  std::vector<std::array<double, 2>> pts;
  for (const auto *r : rows) pts.push_back({r->H, r->error.*member});
  return fit_rate(pts);
}

// Every multiscale run seen by the acceptance suite, for criterion 8.
std::vector<ExperimentResult> g_runs;

ExperimentResult run(const RunConfig &c) {
  ExperimentResult r = run_experiment(c);
  g_runs.push_back(r);
  return r;
}

ExperimentResult g_constant;  // fem + slod m=2, lambda = mu = 1, with kappa

Outcome criterion1() {
  RunConfig c = base_config("c1");
  c.methods = {"fem", "slod"};
  c.oversampling = {2};
  c.kappa = true;
  g_constant = run(c);
  const auto fem = select(g_constant, "fem");
  const double l2 = rate(fem, &Norms::l2), h1 = rate(fem, &Norms::h1_semi);
  Report rep;
  rep.check(l2 >= 1.8 && l2 <= 2.2, "FEM L2 rate " + num(l2) + " in [1.8, 2.2]");
  rep.check(h1 >= 0.8 && h1 <= 1.2, "FEM H1 rate " + num(h1) + " in [0.8, 1.2]");
  return rep.out;
}

Outcome criterion2() {
  Report rep;
  for (int n : {4, 8, 16}) {
    const double s = find(g_constant, "slod", n, 2).error.h1_semi;
    const double f = find(g_constant, "fem", n, 2).error.h1_semi;
    rep.check(s <= f, "H=1/" + std::to_string(n) + " SLOD " + num(s) + " <= FEM " + num(f));
  }
  const double s4 = find(g_constant, "slod", 4, 2).error.h1_semi;
  const double f16 = find(g_constant, "fem", 16, 2).error.h1_semi;
  rep.check(s4 <= f16, "SLOD(1/4) " + num(s4) + " <= FEM(1/16) " + num(f16));
  return rep.out;
}

Outcome criterion3() {
  RunConfig c = base_config("c3");
  c.methods = {"lod", "slod"};
  c.n_coarse = {16};
  c.oversampling = {1, 2, 3, 4};
  const ExperimentResult r = run(c);
  Report rep;
  std::vector<double> s, l;
  for (int m = 1; m <= 4; ++m) {
    s.push_back(find(r, "slod", 16, m).error.h1_semi);
    l.push_back(find(r, "lod", 16, m).error.h1_semi);
  }
  bool decreasing = true;
  std::string seq;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i > 0 && !(s[i] < s[i - 1])) decreasing = false;
    seq += (i ? " " : "") + num(s[i]);
  }
  rep.check(decreasing, "SLOD H1 errors m=1..4 strictly decreasing (" + seq + ")");
  rep.check(s[2] / s[0] <= 0.25, "err(3)/err(1) = " + num(s[2] / s[0]) + " <= 0.25");
  bool dominated = true;
  for (std::size_t i = 0; i < s.size(); ++i) dominated = dominated && s[i] <= 1.05 * l[i];
  rep.check(dominated, "SLOD <= 1.05 LOD at every m (LOD m=1..4: " + num(l[0]) + " " + num(l[1]) + " " +
                           num(l[2]) + " " + num(l[3]) + ")");
  return rep.out;
}

RunConfig criterion4_config(const std::string &name) {
  RunConfig c = random_config(name);
  c.methods = {"fem", "slod"};
  c.n_coarse = {4, 8};
  c.refinement_ratio = 8;
  c.oversampling = {3};
  return c;
}

Outcome criterion4() {
  const ExperimentResult r = run(criterion4_config("c4"));
  Report rep;
  const double s = find(r, "slod", 8, 3).error.h1_semi, f = find(r, "fem", 8, 3).error.h1_semi;
  rep.check(s <= 0.5 * f, "SLOD(1/8) " + num(s) + " <= 0.5 FEM(1/8) " + num(f));
  const double fr = rate(select(r, "fem"), &Norms::h1_semi);
  rep.check(fr < 0.8, "FEM H1 rate over {1/4, 1/8} " + num(fr) + " < 0.8");
  return rep.out;
}

Outcome criterion5() {
  RunConfig c = random_config("c5");
  c.methods = {"slod"};
  c.rhs = "smooth";
  c.oversampling = {3};
  const ExperimentResult r = run(c);
  const auto rows = select(r, "slod");
  const double l2 = rate(rows, &Norms::l2), h1 = rate(rows, &Norms::h1_semi);
  Report rep;
  rep.check(l2 >= 2.5 && l2 <= 3.5, "SLOD L2 rate " + num(l2) + " in [2.5, 3.5]");
  rep.check(h1 >= 1.6 && h1 <= 2.4, "SLOD H1 rate " + num(h1) + " in [1.6, 2.4]");
  return rep.out;
}

Outcome criterion6() {
  Report rep;
  double lo = 1e300, hi = 0.0;
  std::string seq;
  for (int n : {4, 8, 16}) {
    const auto &row = find(g_constant, "slod", n, 2);
    rep.check(std::isfinite(row.kappa) && !row.kappa_approximate, "kappa(1/" + std::to_string(n) + ") = " +
                                                                     num(row.kappa));
    const double scaled = row.kappa * row.H * row.H;
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
  }
  rep.check(hi / lo <= 4.0, "max/min kappa H^2 = " + num(hi / lo) + " <= 4");
  return rep.out;
}

Outcome criterion7() {
  Report rep;
  const auto field = CoefficientField::uniform_random(20, 1, 100, 77);

  // D against the dense saddle-point Schur complement on a 3x3-cell patch
  const MeshHierarchy m5(5, 4);
  const auto center = m5.coarse_cell_id({2, 2});
  const auto ops = build_patch_operators(m5, std::make_shared<const Patch>(build_patch(m5, center, 1)), field);
  const auto data = oracle::patch_data(5, 4, field, {1, 1}, {3, 3});
  const auto saddle = oracle::saddle_schur(data);
  const double d_err = (ops.schur - saddle.schur).norm() / saddle.schur.norm();
  rep.check(d_err <= 1e-8, "D vs Schur oracle rel " + num(d_err));

  // B against term-by-term quadrature
  const Matrix b = assemble_boundary_matrix(ops);
  const Matrix b_ref =
      oracle::restrict(data.stiffness, data.sigma, data.interior) * saddle.responses - data.pairing_sigma.transpose();
  const double b_err = (b - b_ref).norm() / b_ref.norm();
  rep.check(b_err <= 1e-8, "B vs quadrature oracle rel " + num(b_err));

  // coarse stiffness against an explicit global fine matrix on 4x4
  const MeshHierarchy m4(4, 4);
  const auto field4 = CoefficientField::uniform_random(8, 1, 100, 78);
  BasisBuildOptions opts;
  opts.oversampling = 1;
  const CoarseSystem sys =
      assemble_coarse(m4, build_bases(m4, field4, opts), assemble_load(m4, RhsField::constant(1, 1)));
  const Matrix a = oracle::global_stiffness(16, field4);
  Matrix phi(a.rows(), static_cast<Eigen::Index>(sys.bases.size()));
  for (Eigen::Index i = 0; i < phi.cols(); ++i) phi.col(i) = to_global(m4, sys.bases[i]);
  const Matrix ah_ref = phi.transpose() * a * phi;
  const double ah_err = (Matrix(sys.stiffness) - ah_ref).norm() / ah_ref.norm();
  rep.check(ah_err <= 1e-8, "A_H vs global matrix oracle rel " + num(ah_err));

  // full-rank correction against dense QR least squares (H = 1/8, m = 2, lambda = mu = 1)
  const MeshHierarchy m8(8, 4);
  const auto c8 = m8.coarse_cell_id({3, 4});
  const auto ops8 = build_patch_operators(m8, std::make_shared<const Patch>(build_patch(m8, c8, 2)),
                                          CoefficientField::constant(1, 1));
  SuperlocalizationTrace trace;
  superlocalize(ops8, assemble_boundary_matrix(ops8), static_cast<std::size_t>(ops8.patch->local_cell(c8)), 0, {},
                &trace);
  const Vector ls = trace.reduced_operator.colPivHouseholderQr().solve(Vector(-trace.center_functional));
  const double c_err = (trace.full_rank_correction - ls).norm() / ls.norm();
  rep.check(trace.spectrum.rank == trace.reduced_operator.cols(),
            "full numerical rank " + std::to_string(trace.spectrum.rank));
  rep.check(c_err <= 1e-6, "c vs QR least squares rel " + num(c_err));
  return rep.out;
}

Vector random_interior(const MeshHierarchy &m, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(m.n_fine_dofs()));
  for (auto d : m.free_dofs()) v[static_cast<Eigen::Index>(d)] = 2 * rng.uniform() - 1;
  return v;
}

Outcome criterion8() {
  Report rep;
  const auto field = CoefficientField::uniform_random(16, 1, 100, 5);
  const MeshHierarchy m(8, 2);

  // symmetry and SPD of the stiffness matrices
  const SparseMatrix a = assemble_stiffness(m, field);
  const double asym = (Matrix(a) - Matrix(a.transpose())).norm() / Matrix(a).norm();
  const SparseMatrix free = restrict_matrix(a, m.free_dofs(), m.free_dofs());
  Eigen::SimplicialLLT<SparseMatrix> llt(free);
  rep.check(asym <= 1e-12 && llt.info() == Eigen::Success, "stiffness symmetric (" + num(asym) + ") and SPD");

  // projection: idempotent on its range, L2-stable; Korn on zero-boundary samples
  const auto whole = build_patch_operators(m, std::make_shared<const Patch>(build_patch(m, 0, 8)), field);
  SplitMix64 rng(31);
  Vector g(static_cast<Eigen::Index>(whole.n_coarse()));
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.uniform() - 0.5;
  const Vector lifted = whole.responses * (whole.companions * g);
  const double idem = (whole.cell_means(lifted) - g).norm() / g.norm();
  const ProjectionOperator p = assemble_projection(m);
  const NormEvaluator norms(m, field);
  bool stable = true, korn = true;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Vector v = random_interior(m, 500 + s);
    const double pv = std::sqrt(m.coarse_cell_measure()) * (p.means * v).norm();
    stable = stable && pv <= norms(v).l2 * (1 + 1e-12);
    const auto q = oracle::quadrature_norms(v, m.n_fine(), field);
    korn = korn && std::sqrt(q.grad) <= std::sqrt(2.0 * q.strain) * (1 + 1e-12);
  }
  rep.check(idem <= 1e-9, "projection idempotent on its range (" + num(idem) + ")");
  rep.check(stable, "|P v| <= |v| on 100 samples");
  rep.check(korn, "Korn |grad v| <= sqrt2 |eps v| on 100 samples");

  // LOD deviation 0; delta_s = 0 gives normalized LOD; empty Sigma falls back to LOD
  double lod_dev = 0.0, degen = 0.0;
  SuperlocalizationOptions zero;
  zero.stability_tolerance = 0.0;
  for (std::size_t t = 0; t < m.n_coarse_cells(); t += 7) {
    const auto ops = build_patch_operators(m, std::make_shared<const Patch>(build_patch(m, t, 2)), field);
    const auto q = static_cast<std::size_t>(ops.patch->local_cell(t));
    const Matrix bm = assemble_boundary_matrix(ops);
    for (int k = 0; k < 2; ++k) {
      const LocalBasis l = lod_basis(ops, q, k);
      lod_dev = std::max(lod_dev, stability_deviation(ops.cell_means(l.values), ops.coarse_index(q, k)));
      const LocalBasis s = superlocalize(ops, bm, q, k, zero);
      degen = std::max(degen, (s.values - l.values / l.energy_norm).norm() / s.values.norm());
    }
  }
  rep.check(lod_dev <= 1e-9, "LOD deviation " + num(lod_dev));
  rep.check(degen <= 1e-12, "delta_s=0 equals normalized LOD (" + num(degen) + ")");
  const auto ops_all = build_patch_operators(m, std::make_shared<const Patch>(build_patch(m, 20, 8)), field);
  const Matrix empty = assemble_boundary_matrix(ops_all);
  const LocalBasis fb = superlocalize(ops_all, empty, 20, 1);
  const LocalBasis fl = lod_basis(ops_all, 20, 1);
  rep.check(empty.rows() == 0 && (fb.values - fl.values / fl.energy_norm).norm() < 1e-13,
            "empty Sigma falls back to LOD");

  // every basis of every acceptance run: loop terminated in [0, r], deviation <= 0.5
  std::size_t count = 0;
  bool terminated = true, within = true;
  double worst = 0.0;
  for (const auto &r : g_runs)
    for (const auto &row : r.rows) {
      if (row.method != "slod") continue;
      for (const auto &b : row.bases) {
        ++count;
        terminated = terminated && b.stabilization_rank >= 0 && b.stabilization_rank <= b.rank;
        within = within && b.deviation <= row.delta_s;
        worst = std::max(worst, b.deviation);
      }
    }
  rep.check(count > 0 && terminated, "stability loop terminated for all " + std::to_string(count) + " SLOD bases");
  rep.check(within, "all emitted deviations <= 0.5 (max " + num(worst) + ")");
  return rep.out;
}

std::string strip_timing(const fs::path &csv) {
  std::ifstream is(csv);
  std::string out;
  for (std::string line; std::getline(is, line);) {
    // drop the last two columns (wall times)
    auto cut = line.rfind(',');
    if (cut != std::string::npos) cut = line.rfind(',', cut - 1);
    out += line.substr(0, cut) + '\n';
  }
  return out;
}

Outcome criterion9() {
  Report rep;
  std::string csv[2];
  for (int i = 0; i < 2; ++i) {
    RunConfig c = criterion4_config("c9_" + std::to_string(i));
    c.cache_reference = false;
    fs::remove_all(c.output_dir);
    write_outputs(c, run_experiment(c));
    csv[i] = strip_timing(c.output_dir / "results.csv");
  }
  rep.check(!csv[0].empty() && csv[0] == csv[1], "results.csv identical across reruns (wall-time columns excluded)");
  return rep.out;
}

}  // namespace

int main() {
  fs::remove_all(kWork);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"FEM baseline rates", criterion1},
      {"SLOD beats FEM at equal H", criterion2},
      {"decay in oversampling", criterion3},
      {"heterogeneous coefficients", criterion4},
      {"smooth right-hand side rates", criterion5},
      {"condition number order", criterion6},
      {"oracle equivalences", criterion7},
      {"structural invariants", criterion8},
      {"determinism", criterion9},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += o.pass ? 0 : 1;
    std::printf("%s criterion %zu (%s) [%.1fs]: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                secs, o.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(kWork);
  return failures;
}
