#include <cmath>

#include "doctest.h"
#include "fixtures.h"
#include "laval/assembly.h"
#include "laval/errors.h"

using namespace laval;

namespace {

struct Run {
  SubsonicField sub;
  SupersonicField sup;
  TransonicSolution sol;
};

Run transonic(const RunConfig& c, const GasModel& gas) {
  Run r;
  const NozzleSpec spec = make_spec(c);
  r.sub = subsonic_fixed_point(spec, gas, c.subsonic, gas.c_star());
  r.sup = supersonic_fixed_point(spec, gas, c.supersonic);
  r.sol = connect(&r.sub, &r.sup, gas);
  reconstruct_theta(r.sol, gas);
  to_physical(r.sol, gas);
  return r;
}

}  // namespace

TEST_CASE("straight channel maps to the uniform sonic stream") {
  const GasModel gas(1.4);
  const double cs = gas.c_star(), rho = gas.density(cs * cs);
  const RunConfig c = fixtures::coarse(0.0);
  Run r = transonic(c, gas);
  for (const FieldBlock* b : {&r.sol.sub, &r.sol.sup}) {
    for (size_t i = 0; i < b->phi.size(); ++i) {
      for (size_t j = 0; j < b->psi.size(); ++j) {
        const int ii = static_cast<int>(i), jj = static_cast<int>(j);
        CHECK(b->q(ii, jj) == cs);
        CHECK(b->theta(ii, jj) == 0.0);
        CHECK(b->x(ii, jj) == doctest::Approx(b->phi[i] / cs).epsilon(1e-13).scale(1.0));
        CHECK(b->y(ii, jj) == doctest::Approx(b->psi[j] / (rho * cs)).epsilon(1e-13));
      }
    }
  }
  CHECK(r.sol.matching.qphi_gap == 0.0);
  const ClosureReport cl = physical_closure(r.sol, make_spec(c), gas);
  CHECK(cl.wall_error <= 1e-13);
  CHECK(cl.flux_drift <= 1e-13);
}

TEST_CASE("default nozzle closes in the physical plane") {
  const GasModel gas(1.4);
  const RunConfig c = fixtures::coarse();
  Run r = transonic(c, gas);
  CHECK(r.sol.matching.mass_mismatch <= 1e-6);
  CHECK(r.sol.curl_residual <= 1e-4);
  const ClosureReport cl = physical_closure(r.sol, make_spec(c), gas, 5);
  CHECK(cl.wall_error <= 0.02);
  CHECK(cl.flux_drift <= 0.005);
  CHECK(cl.wall_angle_error <= 1e-3);
  REQUIRE(cl.station_x.size() == 5);
  CHECK(cl.station_x.front() < 0.0);
  CHECK(cl.station_x.back() > 0.0);
  // Both one-sided q_phi values are small at the sonic line.
  CHECK(r.sol.matching.qphi_minus < 1e-3);
  CHECK(r.sol.matching.qphi_plus < 1e-3);
}

TEST_CASE("combined field shares the sonic column once") {
  const GasModel gas(1.4);
  Run r = transonic(fixtures::coarse(), gas);
  const PotentialField pf = combined_field(r.sol);
  const size_t n = r.sol.sub.phi.size() + r.sol.sup.phi.size() - 1;
  REQUIRE(pf.phi.size() == n);
  CHECK(pf.psi == r.sol.sub.psi);
  for (size_t i = 1; i < pf.phi.size(); ++i) CHECK(pf.phi[i] > pf.phi[i - 1]);
  const int k = static_cast<int>(r.sol.sub.phi.size()) - 1;
  CHECK(pf.phi[k] == 0.0);
  for (size_t j = 0; j < pf.psi.size(); ++j) CHECK(pf.q(k, static_cast<int>(j)) == gas.c_star());
}

TEST_CASE("mass mismatch between the sides is rejected") {
  const GasModel gas(1.4);
  RunConfig a = fixtures::coarse(), b = fixtures::coarse();
  b.nozzle.f0 = 1.01;
  const SubsonicField sub = subsonic_fixed_point(make_spec(a), gas, a.subsonic, gas.c_star());
  const SupersonicField sup = supersonic_fixed_point(make_spec(b), gas, b.supersonic);
  CHECK_THROWS_AS(connect(&sub, &sup, gas), DomainError);
}
