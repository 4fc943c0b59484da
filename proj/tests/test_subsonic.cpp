#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.h"
#include "laval/grid.h"
#include "laval/subsonic.h"

using namespace laval;

namespace {

SubsonicProblem seeded_problem(const NozzleSpec& spec, const GasModel& gas, const SubsonicOptions& o,
                               double seed) {
  SpeedSamples in, wall;
  in.s = uniform_nodes(0.0, spec.inlet_height(), 2 * o.n_psi);
  in.q.assign(in.s.size(), seed);
  wall.s = graded_nodes(spec.l_minus, 0.0, 2 * o.n_phi, o.grading_ratio, o.max_stretch, ClusterEnd::upper);
  wall.q.assign(wall.s.size(), seed);
  return make_subsonic_problem(spec, gas, build_maps(spec, gas, in, wall, {}), o);
}

double max_deviation(const SubsonicField& f, double c) {
  double d = 0.0;
  for (double v : f.q.data()) d = std::max(d, std::abs(v - c));
  return d;
}

}  // namespace

TEST_CASE("straight channel: any outlet value is reproduced exactly") {
  const GasModel gas(1.4);
  const NozzleSpec spec = default_wall(-0.3, 0.3, 1.0, 3.0, 3.0, 0.0);
  SubsonicOptions o;
  o.n_phi = 32;
  o.n_psi = 16;
  const SubsonicProblem pb = seeded_problem(spec, gas, o, 0.7 * gas.c_star());
  for (double c : {0.3 * gas.c_star(), 0.5 * gas.c_star(), 0.99 * gas.c_star()}) {
    CHECK(max_deviation(solve_regularized(pb, gas, c, o), c) <= 1e-12);
  }
  const SubsonicField fp = subsonic_fixed_point(spec, gas, o, gas.c_star());
  CHECK(max_deviation(fp, gas.c_star()) <= 1e-12);
  CHECK(fp.outer_iterations == 1);
}

TEST_CASE("continuation schedule") {
  const GasModel gas(1.4);
  const std::vector<double> s = default_schedule(gas, 1e-6);
  REQUIRE(s.size() > 3);
  CHECK(s.front() == doctest::Approx(gas.c_star() * (1.0 - 0.5 / 3.0)));
  for (size_t k = 1; k < s.size(); ++k) CHECK(s[k] > s[k - 1]);
  CHECK(gas.c_star() - s.back() < 1e-6 * gas.c_star());
  CHECK(gas.c_star() - s[s.size() - 2] >= 1e-6 * gas.c_star());
}

TEST_CASE("regularized solve lies between the closed-form barriers") {
  const GasModel gas(1.4);
  const double cs = gas.c_star();
  const NozzleSpec spec = default_wall(-0.3, 0.3, 1.0, 3.0, 3.0, 0.1);
  SubsonicOptions o;
  o.n_phi = 32;
  o.n_psi = 16;
  const SubsonicProblem pb = seeded_problem(spec, gas, o, 0.8 * cs);
  const SubsonicField f = solve_regularized(pb, gas, 0.5 * cs, o);
  int violations = 0;
  for (size_t i = 0; i < f.phi.size(); ++i) {
    for (size_t j = 0; j < f.psi.size(); ++j) {
      const double q = f.q(static_cast<int>(i), static_cast<int>(j));
      if (q > subsonic_supersolution(cs, f.phi[i], f.psi[j], 0.0)) ++violations;
      if (q < subsonic_subsolution(gas, cs / 3.0, 1.0, f.phi[i])) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("comparison principle: ordered outlet values give ordered fields") {
  const GasModel gas(1.4);
  const double cs = gas.c_star();
  auto rng = fixtures::rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int k = 0; k < 5; ++k) {
    const NozzleSpec spec = default_wall(-0.2 - 0.15 * U(rng), 0.3, 1.0, 2.5 + 1.5 * U(rng), 3.0, 0.02 + 0.13 * U(rng));
    SubsonicOptions o;
    o.n_phi = 32;
    o.n_psi = 16;
    const SubsonicProblem pb = seeded_problem(spec, gas, o, cs * (0.5 + 0.45 * U(rng)));
    const double c1 = cs * (0.35 + 0.5 * U(rng));
    const double c2 = c1 + cs * 0.1 * U(rng);
    const SubsonicField f1 = solve_regularized(pb, gas, c1, o), f2 = solve_regularized(pb, gas, c2, o);
    int violations = 0;
    for (size_t n = 0; n < f1.q.data().size(); ++n) {
      if (f1.q.data()[n] > f2.q.data()[n]) ++violations;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("fixed point on the default nozzle") {
  const GasModel gas(1.4);
  const double cs = gas.c_star();
  const NozzleSpec spec = default_wall(-0.3, 0.3, 1.0, 3.0, 3.0, 0.1);
  SubsonicOptions o;
  o.n_phi = 32;
  o.n_psi = 8;
  const SubsonicField f = subsonic_fixed_point(spec, gas, o, cs);
  CHECK(f.outer_iterations > 1);
  CHECK(std::abs(f.m_in - f.m) / f.m <= 1e-6);
  CHECK(f.m == doctest::Approx(mass_flux(spec, gas)).epsilon(1e-14));
  const int N = static_cast<int>(f.phi.size()) - 1;
  for (size_t j = 0; j < f.psi.size(); ++j) CHECK(f.q(N, static_cast<int>(j)) == cs);
  for (double v : f.q.data()) {
    CHECK(v > 0.0);
    CHECK(v <= cs);
  }
  // Contraction of the outer map: the boundary change shrinks.
  REQUIRE(f.outer_history.size() >= 3);
  CHECK(f.outer_history.back() < f.outer_history[1]);
  CHECK_THROWS_AS(subsonic_fixed_point(spec, gas, o, 1.2 * cs), std::invalid_argument);
}
