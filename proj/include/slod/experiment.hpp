#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "slod/coeff.hpp"
#include "slod/fem.hpp"

namespace slod {

/// Raised by config parsing/validation; key() is the offending config key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string &message)
      : std::invalid_argument(key + ": " + message), key_(std::move(key)) {}
  const std::string &key() const { return key_; }

 private:
  std::string key_;
};

struct RunConfig {
  std::vector<std::string> methods{"slod"};  // fem | lod | slod
  std::vector<int> n_coarse{4, 8, 16};
  int refinement_ratio = 4;   // experiment h = 1 / (max n_coarse * refinement_ratio)
  int reference_factor = 1;  // reference h = experiment h / reference_factor
  std::vector<int> oversampling{2};
  double delta_s = 0.5;

  std::string field = "constant";  // constant | random
  double lambda = 1.0;
  double mu = 1.0;
  int eta_cells = 16;
  std::array<double, 2> range{1.0, 100.0};
  std::uint64_t seed = 1;

  std::string rhs = "constant";  // constant | smooth
  std::array<double, 2> rhs_value{1.0, 1.0};

  unsigned threads = 1;
  std::filesystem::path output_dir = "slod_out";
  bool kappa = true;
  bool gram = false;
  bool dump_bases = false;
  bool cache_reference = true;

  int n_fine() const;
  int n_reference() const { return n_fine() * reference_factor; }
};

/// Flat `key = value` lines; `#` starts a comment; lists are comma or space
/// separated, optionally wrapped in brackets.
RunConfig parse_config(std::istream &is);
RunConfig load_config(const std::filesystem::path &path);
void validate(const RunConfig &config);

CoefficientField make_field(const RunConfig &config);
RhsField make_rhs(const RunConfig &config);

struct BasisDiagnostics {
  std::size_t cell = 0;
  int component = 0;
  int oversampling = 0;
  int rank = 0;
  int stabilization_rank = 0;
  double residual_full = 0.0;
  double residual_stabilized = 0.0;
  double deviation = 0.0;
  double energy_norm = 0.0;
};

struct ResultRow {
  std::string method;
  int n_coarse = 0;
  double H = 0.0;
  double h = 0.0;
  int m = 0;
  double delta_s = 0.0;
  std::string field_kind;
  std::uint64_t seed = 0;
  Norms error;  // relative to the reference norms
  double kappa = 0.0;  // NaN when not computed
  bool kappa_approximate = false;
  double gram_min = 0.0;  // NaN when not computed
  double residual_surrogate = 0.0;
  double wall_time_basis = 0.0;
  double wall_time_solve = 0.0;
  std::vector<BasisDiagnostics> bases;
  std::string basis_dump;  // write_basis_csv_row lines, only with dump_bases
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  // config order: method, then n_coarse, then m
  Norms reference_norms;
};

ExperimentResult run_experiment(const RunConfig &config);

/// results.csv, field grids, .dat curves and (optionally) per-basis files.
void write_outputs(const RunConfig &config, const ExperimentResult &result);

void write_results_csv(std::ostream &os, const std::vector<ResultRow> &rows);

/// Least-squares slope of log(error) against log(H).
double fit_rate(const std::vector<std::array<double, 2>> &points);

}  // namespace slod
