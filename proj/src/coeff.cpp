#include "slod/coeff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace slod {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

CoefficientField CoefficientField::constant(double lambda, double mu) {
  if (!(lambda > 0.0) || !(mu > 0.0))
    throw std::invalid_argument("Lame parameters must be positive");
  CoefficientField f;
  f.kind_ = Kind::constant;
  f.eta_cells_ = 1;
  f.lambda_ = {lambda};
  f.mu_ = {mu};
  f.low_ = std::min(lambda, mu);
  f.high_ = std::max(lambda, mu);
  return f;
}

CoefficientField CoefficientField::uniform_random(int eta_cells, double low, double high,
                                                  std::uint64_t seed) {
  if (eta_cells < 1) throw std::invalid_argument("eta_cells must be positive");
  if (!(low > 0.0) || !(high > low))
    throw std::invalid_argument("random field range must satisfy 0 < low < high");
  CoefficientField f;
  f.kind_ = Kind::uniform_random;
  f.eta_cells_ = eta_cells;
  f.seed_ = seed;
  f.low_ = low;
  f.high_ = high;
  const auto n = static_cast<std::size_t>(eta_cells) * eta_cells;
  SplitMix64 lambda_stream(seed);
  SplitMix64 mu_stream(seed + 1);
  f.lambda_.resize(n);
  f.mu_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    f.lambda_[i] = low + (high - low) * lambda_stream.uniform();
    f.mu_[i] = low + (high - low) * mu_stream.uniform();
  }
  return f;
}

LameParameters CoefficientField::at(std::array<double, kDim> point) const {
  std::size_t idx[kDim];
  for (int a = 0; a < kDim; ++a) {
    if (!(point[a] >= 0.0 && point[a] <= 1.0))
      throw std::out_of_range("point outside the unit square");
    const int i = std::min(eta_cells_ - 1, static_cast<int>(std::floor(point[a] * eta_cells_)));
    idx[a] = static_cast<std::size_t>(i);
  }
  const std::size_t c = idx[1] * eta_cells_ + idx[0];
  return {lambda_[c], mu_[c]};
}

bool CoefficientField::resolved_by(const MeshHierarchy &mesh) const {
  return mesh.n_fine() % eta_cells_ == 0;
}

LameParameters CoefficientField::on_fine_cell(const MeshHierarchy &mesh, Index2 cell) const {
  const int per = mesh.n_fine() / eta_cells_;
  const std::size_t c = static_cast<std::size_t>(cell[1] / per) * eta_cells_ + cell[0] / per;
  return {lambda_[c], mu_[c]};
}

double CoefficientField::min_lambda() const { return *std::min_element(lambda_.begin(), lambda_.end()); }
double CoefficientField::max_lambda() const { return *std::max_element(lambda_.begin(), lambda_.end()); }
double CoefficientField::min_mu() const { return *std::min_element(mu_.begin(), mu_.end()); }
double CoefficientField::max_mu() const { return *std::max_element(mu_.begin(), mu_.end()); }

double CoefficientField::alpha() const {
  // (A:xi):xi = 2 mu xi:xi + lambda tr(xi)^2, minimized by traceless xi.
  return min_mu();
}

double CoefficientField::beta() const {
  // tr(xi)^2 <= d xi:xi, attained at xi = I.
  double b = 0.0;
  for (std::size_t i = 0; i < mu_.size(); ++i) b = std::max(b, 2.0 * mu_[i] + kDim * lambda_[i]);
  return b;
}

std::string CoefficientField::descriptor() const {
  std::ostringstream os;
  os.precision(17);
  if (kind_ == Kind::constant)
    os << "constant(" << lambda_[0] << ',' << mu_[0] << ')';
  else
    os << "random(" << eta_cells_ << ',' << low_ << ',' << high_ << ',' << seed_ << ')';
  return os.str();
}

void CoefficientField::write_grid_csv(std::ostream &os, bool lambda) const {
  const auto &v = lambda ? lambda_ : mu_;
  os.precision(17);
  for (int y = 0; y < eta_cells_; ++y) {
    for (int x = 0; x < eta_cells_; ++x) {
      if (x) os << ',';
      os << v[static_cast<std::size_t>(y) * eta_cells_ + x];
    }
    os << '\n';
  }
}

RhsField RhsField::constant(double fx, double fy) {
  RhsField f;
  f.kind_ = Kind::constant;
  f.value_ = {fx, fy};
  return f;
}

RhsField RhsField::smooth() {
  RhsField f;
  f.kind_ = Kind::smooth;
  return f;
}

RhsField RhsField::callback(Callback fn, std::string name) {
  RhsField f;
  f.kind_ = Kind::callback;
  f.fn_ = std::move(fn);
  f.name_ = std::move(name);
  return f;
}

std::array<double, kDim> RhsField::operator()(double x, double y) const {
  using std::numbers::pi;
  switch (kind_) {
    case Kind::constant:
      return value_;
    case Kind::smooth: {
      const double c = std::cos(pi * (x + y));
      return {pi * pi * (4.0 * std::sin(2 * pi * y) * (-1.0 + 2.0 * std::cos(2 * pi * x)) - c),
              pi * pi * (4.0 * std::sin(2 * pi * x) * (-1.0 + 2.0 * std::cos(2 * pi * y)) - c)};
    }
    case Kind::callback:
      return fn_(x, y);
  }
  return {0.0, 0.0};
}

std::string RhsField::descriptor() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::constant:
      os << "constant(" << value_[0] << ',' << value_[1] << ')';
      break;
    case Kind::smooth:
      os << "smooth";
      break;
    case Kind::callback:
      os << "callback(" << name_ << ')';
      break;
  }
  return os.str();
}

}  // namespace slod
