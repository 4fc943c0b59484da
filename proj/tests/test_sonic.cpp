#include <cmath>

#include "doctest.h"
#include "laval/errors.h"
#include "laval/sonic_analysis.h"

using namespace laval;

namespace {

template <class F>
PotentialField synthetic(F&& q, int n0 = 41, int n1 = 21, double half = 0.1, double m = 0.5) {
  PotentialField f;
  for (int i = 0; i < n0; ++i) f.phi.push_back(-half + 2 * half * i / (n0 - 1));
  for (int j = 0; j < n1; ++j) f.psi.push_back(m * j / (n1 - 1));
  f.q = Field2D(n0, n1);
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j) f.q(i, j) = q(f.phi[i], f.psi[j]);
  return f;
}

}  // namespace

TEST_CASE("tilted linear speed: no exceptional points") {
  const GasModel gas(1.4);
  const double cs = gas.c_star();
  const PotentialField f = synthetic([&](double p, double s) { return cs + 0.5 * p + 0.05 * (s - 0.25); });
  const SonicDiagnostics d = classify_sonic_points(f, gas);
  REQUIRE(!d.points.empty());
  CHECK(d.exceptional.empty());
  CHECK(d.exceptional_fraction == 0.0);
  CHECK(d.plus.size() == d.points.size());  // q_psi > 0 everywhere
  CHECK(d.max_qpsi == doctest::Approx(0.05).epsilon(1e-8));
  for (const SonicPoint& p : d.points) {
    const SonicCharacteristics c = characteristics_from_sonic(f, gas, p);
    // On the top wall the supersonic side of an S+ point is outside the domain.
    CHECK(c.inward == (p.psi < f.psi.back()));
    if (c.inward) CHECK_FALSE(c.coincident);
  }
}

TEST_CASE("speed depending on phi only: the sonic line is exceptional") {
  const GasModel gas(1.4);
  const double cs = gas.c_star();
  const PotentialField f = synthetic([&](double p, double) { return cs + 0.3 * p; });
  const SonicDiagnostics d = classify_sonic_points(f, gas);
  CHECK(d.points.size() == f.psi.size());
  CHECK(d.exceptional_fraction == 1.0);
  CHECK(d.exceptional_contiguous);
  CHECK(d.order_consistent);
  for (const SonicPoint& p : d.points) {
    const SonicCharacteristics c = characteristics_from_sonic(f, gas, p);
    CHECK(c.coincident);
    CHECK(c.displacement == 0.0);
  }
}

TEST_CASE("uniform sonic field: every node is an exceptional sonic point") {
  const GasModel gas(1.4);
  const PotentialField f = synthetic([&](double, double) { return gas.c_star(); }, 9, 5);
  const SonicDiagnostics d = classify_sonic_points(f, gas);
  CHECK(d.points.size() == 45);
  CHECK(d.exceptional_fraction == 1.0);
  CHECK(characteristics_from_sonic(f, gas, d.points[7]).coincident);
}

TEST_CASE("supersonic bubble: sonic curve without exceptional points") {
  const GasModel gas(1.4);
  const double cs = gas.c_star();
  // Closed sonic curve around (0, 0.2625), centre between grid rows.
  const PotentialField f = synthetic(
      [&](double p, double s) { return cs + 0.002 - 0.5 * p * p - 0.5 * (s - 0.2625) * (s - 0.2625); });
  const SonicDiagnostics d = classify_sonic_points(f, gas);
  REQUIRE(!d.points.empty());
  CHECK(d.exceptional.empty());
  CHECK_FALSE(d.minus.empty());
  CHECK_FALSE(d.plus.empty());
}

TEST_CASE("subsonic field has no sonic points") {
  const GasModel gas(1.4);
  const PotentialField f = synthetic([&](double, double) { return 0.5 * gas.c_star(); });
  CHECK_THROWS_AS(classify_sonic_points(f, gas), DomainError);
}

TEST_CASE("explicit absolute tolerance") {
  const GasModel gas(1.4);
  const double cs = gas.c_star();
  const PotentialField f = synthetic([&](double p, double s) { return cs + 0.5 * p + 1e-3 * s; });
  ClassifyOptions o;
  o.tol = 1e-2;
  CHECK(classify_sonic_points(f, gas, o).exceptional_fraction == 1.0);
  o.tol = 1e-4;
  CHECK(classify_sonic_points(f, gas, o).exceptional_fraction == 0.0);
}
