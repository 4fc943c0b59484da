#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "laval/fitting.h"
#include "laval/grid.h"
#include "laval/interpolation.h"

using namespace laval;

TEST_CASE("graded nodes cluster toward the requested end") {
  const std::vector<double> x = graded_nodes(-1.0, 0.0, 40, 1.1, 100.0, ClusterEnd::upper);
  REQUIRE(x.size() == 41);
  CHECK(x.front() == -1.0);
  CHECK(x.back() == 0.0);
  for (size_t i = 1; i + 1 < x.size(); ++i) CHECK(x[i + 1] - x[i] <= x[i] - x[i - 1] + 1e-15);
  const std::vector<double> u = uniform_nodes(0.0, 2.0, 4);
  CHECK(u == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
}

TEST_CASE("power-law fit recovers exact exponents") {
  std::vector<double> x, y;
  for (int k = 1; k <= 40; ++k) {
    x.push_back(-0.01 * k);
    y.push_back(3.0 * std::pow(0.01 * k, 2.5));
  }
  const PowerFit f = fit_power_law(x, y, 0.05, 0.3);
  CHECK(f.exponent == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(f.prefactor == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.points == 26);
  CHECK_THROWS_AS(fit_power_law(x, y, 0.5, 0.6), std::domain_error);
}

TEST_CASE("observed orders") {
  const std::vector<double> p = observed_orders({1.0, 0.25, 0.0625});
  REQUIRE(p.size() == 2);
  CHECK(p[0] == doctest::Approx(2.0));
  CHECK(p[1] == doctest::Approx(2.0));
}

TEST_CASE("cubic quadrature and Lagrange interpolation are exact for cubics") {
  auto f = [](double x) { return 1.0 - 2.0 * x + 0.5 * x * x * x; };
  auto F = [](double x) { return x - x * x + 0.125 * x * x * x * x; };
  std::vector<double> x = graded_nodes(0.0, 2.0, 13, 1.2, 100.0, ClusterEnd::lower), y;
  for (double v : x) y.push_back(f(v));
  const std::vector<double> I = cumulative_cubic(x, y, 3);
  for (size_t i = 0; i < x.size(); ++i) CHECK(I[i] == doctest::Approx(F(x[i]) - F(x[3])).epsilon(1e-12));
  for (double xi : {0.013, 0.77, 1.9}) {
    CHECK(lagrange_interp(x, y, xi) == doctest::Approx(f(xi)).epsilon(1e-13));
    CHECK(lagrange_slope(x, y, xi) == doctest::Approx(-2.0 + 1.5 * xi * xi).epsilon(1e-11));
  }
  Field2D g(static_cast<int>(x.size()), static_cast<int>(x.size()));
  for (size_t i = 0; i < x.size(); ++i)
    for (size_t j = 0; j < x.size(); ++j) g(static_cast<int>(i), static_cast<int>(j)) = f(x[i]) * x[j] * x[j];
  const GridInterpolator gi(x, x, g);
  CHECK(gi(0.3, 1.7) == doctest::Approx(f(0.3) * 1.7 * 1.7).epsilon(1e-12));
}

TEST_CASE("monotone cubic preserves monotonicity and inverts") {
  std::vector<double> x{0.0, 0.1, 0.5, 0.55, 2.0}, y{0.0, 1.0, 1.1, 3.0, 3.2};
  const MonotoneCubic m(x, y);
  double prev = -1.0;
  for (int k = 0; k <= 400; ++k) {
    const double v = m(2.0 * k / 400.0);
    CHECK(v >= prev);
    prev = v;
  }
  for (size_t k = 0; k < x.size(); ++k) CHECK(m(x[k]) == doctest::Approx(y[k]).epsilon(1e-15));
}
