#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "slod/coeff.hpp"

using namespace slod;

namespace {

// min over symmetric xi of xi:(A xi) / (2 xi:xi), by grid search on the unit sphere
double alpha_by_search(double lambda, double mu) {
  double best = 1e300;
  const int n = 60;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j < 2 * n; ++j) {
      const double th = std::numbers::pi * i / n, ph = std::numbers::pi * j / n;
      const double a = std::sin(th) * std::cos(ph), b = std::sin(th) * std::sin(ph), c = std::cos(th);
      // xi = [[a, c/sqrt2], [c/sqrt2, b]], so xi:xi = 1
      const double tr = a + b;
      const double quad = 2 * mu * (a * a + b * b + c * c) + lambda * tr * tr;
      best = std::min(best, quad / 2.0);
    }
  return best;
}

}  // namespace

TEST_CASE("constant field") {
  const auto f = CoefficientField::constant(1, 1);
  const auto l = f.at({0.3, 0.9});
  CHECK(l.lambda == 1.0);
  CHECK(l.mu == 1.0);
  const auto g = CoefficientField::constant(2, 3);
  CHECK(g.min_lambda() == 2.0);
  CHECK(g.max_lambda() == 2.0);
  CHECK(g.alpha() == doctest::Approx(alpha_by_search(2, 3)).epsilon(1e-6));
  CHECK(f.alpha() == doctest::Approx(alpha_by_search(1, 1)).epsilon(1e-6));
  CHECK(f.alpha() == 1.0);
  CHECK(g.beta() == doctest::Approx(2 * 3 + 2 * 2));
  CHECK_THROWS_AS(CoefficientField::constant(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(CoefficientField::constant(1, -1), std::invalid_argument);
}

TEST_CASE("random field values") {
  const auto f = CoefficientField::uniform_random(64, 1, 100, 7);
  CHECK(f.lambda_values().size() == 64 * 64);
  for (double v : f.lambda_values()) CHECK((v >= 1 && v <= 100));
  for (double v : f.mu_values()) CHECK((v >= 1 && v <= 100));

  const auto narrow = CoefficientField::uniform_random(4, 5, 5 + 1e-9, 3);
  CHECK(narrow.min_lambda() == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(narrow.max_mu() == doctest::Approx(5.0).epsilon(1e-9));

  // piecewise constant on eta-cells; lookup by index arithmetic
  const auto g = CoefficientField::uniform_random(8, 1, 100, 11);
  CHECK(g.at({0.130, 0.260}).lambda == g.at({0.240, 0.370}).lambda);
  for (double x : {0.01, 0.2, 0.51, 0.99})
    for (double y : {0.07, 0.33, 0.74}) {
      const int ix = static_cast<int>(std::floor(x * 8)), iy = static_cast<int>(std::floor(y * 8));
      CHECK(g.at({x, y}).lambda == g.lambda_values()[iy * 8 + ix]);
      CHECK(g.at({x, y}).mu == g.mu_values()[iy * 8 + ix]);
    }
  CHECK_THROWS_AS(g.at({1.5, 0.5}), std::out_of_range);

  // bitwise reproducible; lambda and mu streams differ
  const auto h = CoefficientField::uniform_random(8, 1, 100, 11);
  CHECK(h.lambda_values() == g.lambda_values());
  CHECK(h.mu_values() == g.mu_values());
  CHECK(g.lambda_values() != g.mu_values());
  CHECK(g.alpha() == doctest::Approx(g.min_mu()));
}

TEST_CASE("random field sample mean") {
  double sum = 0.0;
  int count = 0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto f = CoefficientField::uniform_random(4, 1, 100, s);
    for (double v : f.lambda_values()) {
      sum += v;
      ++count;
    }
  }
  const double mean = sum / count;
  const double sigma = 99.0 / std::sqrt(12.0) / std::sqrt(static_cast<double>(count));
  CHECK(std::abs(mean - 50.5) <= 3 * sigma);
}

TEST_CASE("resolution contract") {
  const auto f = CoefficientField::uniform_random(16, 1, 100, 1);
  CHECK(f.resolved_by(MeshHierarchy(4, 4)));
  CHECK(f.resolved_by(MeshHierarchy(8, 8)));
  CHECK_FALSE(f.resolved_by(MeshHierarchy(4, 2)));
  CHECK(CoefficientField::constant(1, 1).resolved_by(MeshHierarchy(3, 1)));
}

TEST_CASE("descriptors and grid dump") {
  CHECK(CoefficientField::constant(1, 1).descriptor() == "constant(1,1)");
  CHECK(CoefficientField::uniform_random(16, 1, 100, 42).descriptor() == "random(16,1,100,42)");
  std::ostringstream os;
  CoefficientField::uniform_random(4, 1, 2, 5).write_grid_csv(os, true);
  int lines = 0;
  for (char c : os.str()) lines += c == '\n';
  CHECK(lines == 4);
}

TEST_CASE("right-hand sides") {
  const auto c = RhsField::constant(1, 1);
  CHECK(c(0.3, 0.7) == std::array<double, 2>{1.0, 1.0});

  const auto s = RhsField::smooth();
  const double pi = std::numbers::pi;
  CHECK(s(0.25, 0.25)[0] == doctest::Approx(-4 * pi * pi).epsilon(1e-12));
  for (double x : {0.1, 0.37, 0.8})
    for (double y : {0.05, 0.5, 0.91}) {
      CHECK(s(x, y)[0] == doctest::Approx(s(y, x)[1]).epsilon(1e-13));
      const double f1 = pi * pi * (4 * std::sin(2 * pi * y) * (-1 + 2 * std::cos(2 * pi * x)) - std::cos(pi * (x + y)));
      CHECK(s(x, y)[0] == doctest::Approx(f1).epsilon(1e-13));
    }
  CHECK(s.descriptor() == "smooth");
}
