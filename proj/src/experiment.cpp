#include "slod/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "slod/coarse.hpp"
#include "slod/lod_basis.hpp"
#include "slod/parallel.hpp"

namespace slod {

namespace fs = std::filesystem;

int RunConfig::n_fine() const {
  int n = 0;
  for (int c : n_coarse) n = std::max(n, c);
  return n * refinement_ratio;
}

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &key, std::string value) {
  value = trim(value);
  if (!value.empty() && value.front() == '[') {
    if (value.back() != ']') throw ConfigError(key, "unterminated list");
    value = value.substr(1, value.size() - 2);
  }
  std::replace(value.begin(), value.end(), ',', ' ');
  std::istringstream is(value);
  std::vector<std::string> out;
  for (std::string item; is >> item;) out.push_back(item);
  if (out.empty()) throw ConfigError(key, "empty value");
  return out;
}

double to_double(const std::string &key, const std::string &s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception &) {
    pos = 0;
  }
  if (pos != s.size() || !std::isfinite(v)) throw ConfigError(key, "not a number: '" + s + "'");
  return v;
}

long long to_integer(const std::string &key, const std::string &s) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception &) {
    pos = 0;
  }
  if (pos != s.size()) throw ConfigError(key, "not an integer: '" + s + "'");
  return v;
}

std::string single(const std::string &key, const std::string &value) {
  const auto items = split_list(key, value);
  if (items.size() != 1) throw ConfigError(key, "expected a single value");
  return items[0];
}

bool to_bool(const std::string &key, const std::string &s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key, "not a boolean: '" + s + "'");
}

std::vector<int> int_list(const std::string &key, const std::string &value) {
  std::vector<int> out;
  for (const auto &s : split_list(key, value)) out.push_back(static_cast<int>(to_integer(key, s)));
  return out;
}

std::array<double, 2> pair_of(const std::string &key, const std::string &value) {
  const auto items = split_list(key, value);
  if (items.size() != 2) throw ConfigError(key, "expected two values");
  return {to_double(key, items[0]), to_double(key, items[1])};
}

void set_diagnostics(RunConfig &c, const std::string &key, const std::string &value) {
  c.kappa = c.gram = false;
  for (const auto &d : split_list(key, value)) {
    if (d == "kappa")
      c.kappa = true;
    else if (d == "gram")
      c.gram = true;
    else if (d != "none")
      throw ConfigError(key, "unknown diagnostic '" + d + "'");
  }
}

}  // namespace

RunConfig parse_config(std::istream &is) {
  RunConfig c;
  std::set<std::string> seen;
  int lineno = 0;
  for (std::string line; std::getline(is, line);) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = line.substr(eq + 1);
    if (!seen.insert(key).second) throw ConfigError(key, "given twice");

    if (key == "methods" || key == "method") {
      c.methods = split_list(key, value);
    } else if (key == "n_coarse") {
      c.n_coarse = int_list(key, value);
    } else if (key == "refinement_ratio") {
      c.refinement_ratio = static_cast<int>(to_integer(key, single(key, value)));
    } else if (key == "reference_factor") {
      c.reference_factor = static_cast<int>(to_integer(key, single(key, value)));
    } else if (key == "oversampling") {
      c.oversampling = int_list(key, value);
    } else if (key == "delta_s") {
      c.delta_s = to_double(key, single(key, value));
    } else if (key == "field") {
      c.field = single(key, value);
    } else if (key == "lambda") {
      c.lambda = to_double(key, single(key, value));
    } else if (key == "mu") {
      c.mu = to_double(key, single(key, value));
    } else if (key == "eta_cells") {
      c.eta_cells = static_cast<int>(to_integer(key, single(key, value)));
    } else if (key == "range") {
      c.range = pair_of(key, value);
    } else if (key == "seed") {
      const auto s = to_integer(key, single(key, value));
      if (s < 0) throw ConfigError(key, "must be nonnegative");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "rhs") {
      c.rhs = single(key, value);
    } else if (key == "rhs_value") {
      c.rhs_value = pair_of(key, value);
    } else if (key == "threads") {
      const auto t = to_integer(key, single(key, value));
      if (t < 1) throw ConfigError(key, "must be at least 1");
      c.threads = static_cast<unsigned>(t);
    } else if (key == "output_dir") {
      c.output_dir = single(key, value);
    } else if (key == "diagnostics") {
      set_diagnostics(c, key, value);
    } else if (key == "dump_bases") {
      c.dump_bases = to_bool(key, single(key, value));
    } else if (key == "cache_reference") {
      c.cache_reference = to_bool(key, single(key, value));
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  validate(c);
  return c;
}

RunConfig load_config(const fs::path &path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path.string());
  return parse_config(is);
}

void validate(const RunConfig &c) {
  if (c.methods.empty()) throw ConfigError("methods", "no method given");
  for (const auto &m : c.methods)
    if (m != "fem" && m != "lod" && m != "slod") throw ConfigError("methods", "unknown method '" + m + "'");
  if (c.n_coarse.empty()) throw ConfigError("n_coarse", "no coarse mesh given");
  for (int n : c.n_coarse)
    if (n < 1) throw ConfigError("n_coarse", "entries must be positive");
  if (c.refinement_ratio < 1) throw ConfigError("refinement_ratio", "must be positive");
  if (c.reference_factor < 1) throw ConfigError("reference_factor", "must be positive");
  const int nf = c.n_fine();
  for (int n : c.n_coarse)
    if (nf % n != 0)
      throw ConfigError("n_coarse", "fine mesh with " + std::to_string(nf) + " cells does not refine H = 1/" +
                                        std::to_string(n));
  if (c.oversampling.empty()) throw ConfigError("oversampling", "no value given");
  for (int m : c.oversampling)
    if (m < 0) throw ConfigError("oversampling", "must be nonnegative");
  if (!(c.delta_s >= 0.0)) throw ConfigError("delta_s", "must be nonnegative");

  if (c.field == "constant") {
    if (!(c.lambda > 0.0)) throw ConfigError("lambda", "must be positive");
    if (!(c.mu > 0.0)) throw ConfigError("mu", "must be positive");
  } else if (c.field == "random") {
    if (c.eta_cells < 1) throw ConfigError("eta_cells", "must be positive");
    if (!(c.range[0] > 0.0) || !(c.range[1] > c.range[0]))
      throw ConfigError("range", "need 0 < low < high");
    if (nf % c.eta_cells != 0)
      throw ConfigError("refinement_ratio", "h = 1/" + std::to_string(nf) + " does not resolve eta = 1/" +
                                                std::to_string(c.eta_cells));
  } else {
    throw ConfigError("field", "expected 'constant' or 'random'");
  }
  for (int n : c.n_coarse)
    if (c.n_reference() < 4 * n)
      throw ConfigError("refinement_ratio", "reference h must be at most H/4 (H = 1/" + std::to_string(n) + ")");
  if (c.rhs != "constant" && c.rhs != "smooth") throw ConfigError("rhs", "expected 'constant' or 'smooth'");
  if (c.threads < 1) throw ConfigError("threads", "must be at least 1");
}

CoefficientField make_field(const RunConfig &c) {
  if (c.field == "random") return CoefficientField::uniform_random(c.eta_cells, c.range[0], c.range[1], c.seed);
  return CoefficientField::constant(c.lambda, c.mu);
}

RhsField make_rhs(const RunConfig &c) {
  if (c.rhs == "smooth") return RhsField::smooth();
  return RhsField::constant(c.rhs_value[0], c.rhs_value[1]);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t fnv1a(const std::string &s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

// Disk cache of fine reference solutions. The key string is stored in the file
// and compared on load, so hash collisions only cost a recompute.
std::optional<Vector> load_reference(const fs::path &file, const std::string &key) {
  std::ifstream is(file, std::ios::binary);
  if (!is) return std::nullopt;
  std::string stored;
  std::getline(is, stored);
  if (stored != key) return std::nullopt;
  std::uint64_t n = 0;
  is.read(reinterpret_cast<char *>(&n), sizeof n);
  Vector v(static_cast<Eigen::Index>(n));
  is.read(reinterpret_cast<char *>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) return std::nullopt;
  return v;
}

void store_reference(const fs::path &file, const std::string &key, const Vector &v) {
  fs::create_directories(file.parent_path());
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    os << key << '\n';
    const std::uint64_t n = static_cast<std::uint64_t>(v.size());
    os.write(reinterpret_cast<const char *>(&n), sizeof n);
    os.write(reinterpret_cast<const char *>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  }
  fs::rename(tmp, file);
}

struct Context {
  const RunConfig &config;
  CoefficientField field;
  RhsField rhs;
  MeshHierarchy reference_mesh;
  Vector reference;
  std::unique_ptr<NormEvaluator> norms;
  Norms reference_norms;
};

Norms relative_errors(const Context &ctx, const Vector &approx_on_reference) {
  const Norms e = compute_errors(ctx.reference, approx_on_reference, *ctx.norms);
  const auto rel = [](double a, double b) { return b > 0.0 ? a / b : a; };
  return {rel(e.l2, ctx.reference_norms.l2), rel(e.h1_semi, ctx.reference_norms.h1_semi),
          rel(e.energy, ctx.reference_norms.energy)};
}

Vector to_reference(const Context &ctx, const Vector &v) {
  const int nf = ctx.config.n_fine();
  if (ctx.config.reference_factor == 1) return v;
  return prolongate(v, nf, ctx.config.n_reference());
}

ResultRow blank_row(const Context &ctx, const std::string &method, int n, int m) {
  ResultRow r;
  r.method = method;
  r.n_coarse = n;
  r.H = 1.0 / n;
  r.h = 1.0 / ctx.config.n_fine();
  r.m = m;
  r.delta_s = ctx.config.delta_s;
  r.field_kind = ctx.config.field;
  r.seed = ctx.config.seed;
  r.kappa = std::numeric_limits<double>::quiet_NaN();
  r.gram_min = std::numeric_limits<double>::quiet_NaN();
  r.residual_surrogate = std::numeric_limits<double>::quiet_NaN();
  return r;
}

ResultRow run_fem(const Context &ctx, int n) {
  ResultRow r = blank_row(ctx, "fem", n, 0);
  const MeshHierarchy mesh(n, ctx.config.n_fine() / n);
  const auto t0 = Clock::now();
  const SparseMatrix a = assemble_stiffness(mesh, ctx.field);
  const Vector f = assemble_load(mesh, ctx.rhs);
  const Vector u = solve_coarse_fem(mesh, a, f);
  r.wall_time_solve = seconds_since(t0);
  r.error = relative_errors(ctx, to_reference(ctx, u));
  return r;
}

ResultRow run_multiscale(const Context &ctx, const std::string &method, int n, int m, unsigned threads,
                         bool dump) {
  ResultRow r = blank_row(ctx, method, n, m);
  const MeshHierarchy mesh(n, ctx.config.n_fine() / n);

  BasisBuildOptions opts;
  opts.oversampling = m;
  opts.flavor = method == "lod" ? BasisFlavor::lod : BasisFlavor::slod;
  opts.superlocalization.stability_tolerance = ctx.config.delta_s;
  opts.threads = threads;

  auto t0 = Clock::now();
  std::vector<LocalBasis> bases = build_bases(mesh, ctx.field, opts);
  r.wall_time_basis = seconds_since(t0);

  t0 = Clock::now();
  const Vector f = assemble_load(mesh, ctx.rhs);
  CoarseSystem sys = assemble_coarse(mesh, std::move(bases), f, threads);
  solve_coarse(mesh, sys);
  r.wall_time_solve = seconds_since(t0);

  r.error = relative_errors(ctx, to_reference(ctx, sys.fine_solution));
  if (ctx.config.kappa) {
    const ConditionEstimate est = estimate_condition_number(sys.stiffness);
    r.kappa = est.value;
    r.kappa_approximate = est.approximate;
  }
  if (ctx.config.gram) r.gram_min = companion_gram_diagnostic(mesh, sys.bases);
  r.residual_surrogate = max_boundary_residual(sys.bases);

  for (const auto &b : sys.bases)
    r.bases.push_back({b.cell, b.component, m, b.numerical_rank, b.stabilization_rank, b.residual_full,
                       b.residual_stabilized, b.deviation, b.energy_norm});
  if (dump) {
    std::ostringstream os;
    os.precision(17);
    for (const auto &b : sys.bases) write_basis_csv_row(os, b);
    r.basis_dump = os.str();
  }
  return r;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig &config) {
  validate(config);
  Context ctx{config, make_field(config), make_rhs(config), MeshHierarchy(1, config.n_reference()), {}, {}, {}};

  const std::string key = ctx.field.descriptor() + '|' + ctx.rhs.descriptor() + "|h=1/" +
                          std::to_string(config.n_reference());
  char name[32];
  std::snprintf(name, sizeof name, "ref_%016llx.bin", static_cast<unsigned long long>(fnv1a(key)));
  const fs::path cache_file = config.output_dir / "cache" / name;
  std::optional<Vector> cached;
  if (config.cache_reference) cached = load_reference(cache_file, key);
  if (cached && cached->size() == static_cast<Eigen::Index>(ctx.reference_mesh.n_fine_dofs())) {
    ctx.reference = std::move(*cached);
  } else {
    ctx.reference = solve_fine_reference(ctx.reference_mesh, ctx.field, ctx.rhs).displacement;
    if (config.cache_reference) store_reference(cache_file, key, ctx.reference);
  }
  ctx.norms = std::make_unique<NormEvaluator>(ctx.reference_mesh, ctx.field);
  ctx.reference_norms = (*ctx.norms)(ctx.reference);

  // One task per (method, H, m) cell; FEM does not depend on m and is
  // computed once per H.
  struct Task {
    std::string method;
    int n;
    int m;
  };
  std::vector<Task> tasks;
  for (const auto &method : config.methods)
    for (int n : config.n_coarse) {
      if (method == "fem")
        tasks.push_back({method, n, -1});
      else
        for (int m : config.oversampling) tasks.push_back({method, n, m});
    }

  const unsigned outer = tasks.size() > 1 ? config.threads : 1;
  const unsigned inner = outer > 1 ? 1 : config.threads;
  std::vector<ResultRow> computed(tasks.size());
  parallel_for(tasks.size(), outer, [&](std::size_t i) {
    const Task &t = tasks[i];
    computed[i] = t.method == "fem" ? run_fem(ctx, t.n) : run_multiscale(ctx, t.method, t.n, t.m, inner, config.dump_bases);
  });

  ExperimentResult result;
  result.reference_norms = ctx.reference_norms;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].method != "fem") {
      result.rows.push_back(std::move(computed[i]));
      continue;
    }
    for (int m : config.oversampling) {
      ResultRow r = computed[i];
      r.m = m;
      result.rows.push_back(std::move(r));
    }
  }
  return result;
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

std::string fmt_time(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void write_dat(const fs::path &file, const std::string &header, const std::vector<std::array<double, 2>> &pts) {
  std::ofstream os(file);
  os << "# " << header << '\n';
  for (const auto &p : pts) os << fmt(p[0]) << ' ' << fmt(p[1]) << '\n';
}

}  // namespace

void write_results_csv(std::ostream &os, const std::vector<ResultRow> &rows) {
  os << "method,H,h,m,delta_s,field_kind,seed,err_L2,err_H1semi,err_energy,kappa,max_residual_surrogate,"
        "wall_time_basis,wall_time_solve\n";
  for (const auto &r : rows) {
    os << r.method << ',' << fmt(r.H) << ',' << fmt(r.h) << ',' << r.m << ',' << fmt(r.delta_s) << ','
       << r.field_kind << ',' << r.seed << ',' << fmt(r.error.l2) << ',' << fmt(r.error.h1_semi) << ','
       << fmt(r.error.energy) << ',' << fmt(r.kappa) << ',' << fmt(r.residual_surrogate) << ','
       << fmt_time(r.wall_time_basis) << ',' << fmt_time(r.wall_time_solve) << '\n';
  }
}

void write_outputs(const RunConfig &config, const ExperimentResult &result) {
  const fs::path dir = config.output_dir;
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "results.csv");
    write_results_csv(os, result.rows);
  }
  const CoefficientField field = make_field(config);
  {
    std::ofstream os(dir / "field_lambda.csv");
    field.write_grid_csv(os, true);
  }
  {
    std::ofstream os(dir / "field_mu.csv");
    field.write_grid_csv(os, false);
  }

  if (config.kappa || config.gram) {
    std::ofstream os(dir / "diagnostics.csv");
    os << "method,H,m,kappa,kappa_approximate,gram_lambda_min\n";
    for (const auto &r : result.rows)
      if (r.method != "fem")
        os << r.method << ',' << fmt(r.H) << ',' << r.m << ',' << fmt(r.kappa) << ',' << r.kappa_approximate << ','
           << fmt(r.gram_min) << '\n';
  }

  // Curves against H for each (method, m); against m for each (method, H).
  const std::array<std::pair<const char *, double Norms::*>, 3> norms{
      {{"L2", &Norms::l2}, {"H1semi", &Norms::h1_semi}, {"energy", &Norms::energy}}};
  std::map<std::string, std::vector<const ResultRow *>> by_m, by_h;
  for (const auto &r : result.rows) {
    by_m[r.method == "fem" ? std::string("fem") : r.method + "_m" + std::to_string(r.m)].push_back(&r);
    if (r.method != "fem") by_h[r.method + "_H" + std::to_string(r.n_coarse)].push_back(&r);
  }
  for (const auto &[name, rows] : by_m)
    for (const auto &[norm, member] : norms) {
      std::vector<std::array<double, 2>> pts;
      std::set<int> done;
      for (const auto *r : rows)
        if (done.insert(r->n_coarse).second) pts.push_back({r->H, r->error.*member});
      write_dat(dir / (name + "_" + norm + ".dat"), "H err_" + std::string(norm), pts);
    }
  if (config.oversampling.size() > 1)
    for (const auto &[name, rows] : by_h)
      for (const auto &[norm, member] : norms) {
        std::vector<std::array<double, 2>> pts;
        for (const auto *r : rows) pts.push_back({static_cast<double>(r->m), r->error.*member});
        write_dat(dir / (name + "_vs_m_" + norm + ".dat"), "m err_" + std::string(norm), pts);
      }

  if (std::any_of(result.rows.begin(), result.rows.end(), [](const ResultRow &r) { return !r.bases.empty(); })) {
    std::ofstream os(dir / "basis_diagnostics.csv");
    os << "method,H,T,k,m,r,r_s,t_full,t_stabilized,deviation,energy_norm\n";
    for (const auto &r : result.rows)
      for (const auto &b : r.bases)
        os << r.method << ',' << fmt(r.H) << ',' << b.cell << ',' << b.component << ',' << b.oversampling << ','
           << b.rank << ',' << b.stabilization_rank << ',' << fmt(b.residual_full) << ','
           << fmt(b.residual_stabilized) << ',' << fmt(b.deviation) << ',' << fmt(b.energy_norm) << '\n';
  }
  if (config.dump_bases)
    for (const auto &r : result.rows) {
      if (r.basis_dump.empty()) continue;
      std::ofstream os(dir / ("bases_" + r.method + "_H" + std::to_string(r.n_coarse) + "_m" + std::to_string(r.m) +
                              ".csv"));
      write_basis_csv_header(os);
      os << r.basis_dump;
    }
}

double fit_rate(const std::vector<std::array<double, 2>> &points) {
  if (points.size() < 2) throw std::invalid_argument("fit_rate needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto &[h, e] : points) {
    if (!(h > 0.0) || !(e > 0.0)) throw std::invalid_argument("fit_rate needs positive H and error values");
    const double x = std::log(h), y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(points.size());
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("fit_rate needs at least two distinct H values");
  return (n * sxy - sx * sy) / den;
}

}  // namespace slod
