#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "slod/mesh.hpp"

namespace slod {

struct LameParameters {
  double lambda = 1.0;
  double mu = 1.0;
};

/// SplitMix64 (Steele, Lea, Flood 2014). Used instead of the <random>
/// distributions because their output is implementation-defined.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform double in [0, 1) built from the top 53 bits.
  double uniform();

 private:
  std::uint64_t state_;
};

/// Piecewise-constant Lame fields on a square grid of eta_cells^2 cells
/// covering the unit square. Values are stored cell-centered, x fastest.
class CoefficientField {
 public:
  enum class Kind { constant, uniform_random };

  static CoefficientField constant(double lambda, double mu);
  /// lambda is drawn from the stream seeded with `seed`, mu from `seed + 1`,
  /// one draw per eta-cell in lexicographic order.
  static CoefficientField uniform_random(int eta_cells, double low, double high, std::uint64_t seed);

  Kind kind() const { return kind_; }
  int eta_cells() const { return eta_cells_; }
  const std::vector<double> &lambda_values() const { return lambda_; }
  const std::vector<double> &mu_values() const { return mu_; }
  std::uint64_t seed() const { return seed_; }
  std::array<double, 2> range() const { return {low_, high_}; }

  /// Value at a point of the closed unit square. Points on eta-cell faces go
  /// to the cell with the larger index.
  LameParameters at(std::array<double, kDim> point) const;

  /// Value on a fine cell. Requires resolved_by(mesh).
  LameParameters on_fine_cell(const MeshHierarchy &mesh, Index2 cell) const;

  /// True when every fine cell lies in a single eta-cell.
  bool resolved_by(const MeshHierarchy &mesh) const;

  double min_lambda() const;
  double max_lambda() const;
  double min_mu() const;
  double max_mu() const;

  /// Lower ellipticity constant: 2 alpha xi:xi <= (A:xi):xi for symmetric xi.
  double alpha() const;
  /// Upper bound: (A:xi):xi <= beta xi:xi.
  double beta() const;

  /// Stable text key, e.g. "constant(1,1)" or "random(16,1,100,42)".
  std::string descriptor() const;

  /// Writes one grid row per line, y ascending.
  void write_grid_csv(std::ostream &os, bool lambda) const;

 private:
  CoefficientField() = default;

  Kind kind_ = Kind::constant;
  int eta_cells_ = 1;
  std::vector<double> lambda_;
  std::vector<double> mu_;
  std::uint64_t seed_ = 0;
  double low_ = 0.0;
  double high_ = 0.0;
};

/// Right-hand side f of the model problem.
class RhsField {
 public:
  enum class Kind { constant, smooth, callback };
  using Callback = std::function<std::array<double, kDim>(double, double)>;

  static RhsField constant(double fx, double fy);
  /// f = pi^2 [4 sin(2 pi y)(-1 + 2 cos(2 pi x)) - cos(pi (x+y)),
  ///           4 sin(2 pi x)(-1 + 2 cos(2 pi y)) - cos(pi (x+y))].
  static RhsField smooth();
  static RhsField callback(Callback fn, std::string name);

  Kind kind() const { return kind_; }
  std::array<double, kDim> operator()(double x, double y) const;
  std::string descriptor() const;

 private:
  RhsField() = default;

  Kind kind_ = Kind::constant;
  std::array<double, kDim> value_{0.0, 0.0};
  Callback fn_;
  std::string name_;
};

}  // namespace slod
