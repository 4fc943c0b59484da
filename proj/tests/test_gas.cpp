#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.h"
#include "laval/errors.h"
#include "laval/gas_model.h"

using laval::Branch;
using laval::GasModel;

namespace {

double integral(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

// Fourth-order central difference.
template <class F>
double fd(F&& f, double x, double h) {
  return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12.0 * h);
}

}  // namespace

TEST_CASE("critical speed and Mach number") {
  for (double g : {1.3, 1.4, 5.0 / 3.0}) {
    const GasModel gas(g);
    CHECK(gas.c_star() == doctest::Approx(std::sqrt(2.0 / (g + 1.0))).epsilon(1e-15));
    CHECK(gas.q_max() == doctest::Approx(std::sqrt(2.0 / (g - 1.0))).epsilon(1e-15));
    CHECK(gas.mach(gas.c_star()) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gas.A(gas.c_star()) == 0.0);
    CHECK(gas.B(gas.c_star()) == 0.0);
    CHECK(std::abs(gas.dA(gas.c_star())) <= 1e-10);
  }
}

TEST_CASE("A, B and H match independent quadrature and the Prandtl-Meyer angle") {
  for (double g : {1.3, 1.4, 5.0 / 3.0}) {
    const GasModel gas(g);
    const fixtures::Isentropic iso{g};
    const double cs = gas.c_star();
    for (double q : {0.05, 0.3, 0.7 * cs, 0.99 * cs, 1.01 * cs, 1.3 * cs, 0.8 * gas.q_max()}) {
      const double a = integral([&](double t) { return iso.dA(t); }, cs, q);
      const double b = integral([&](double t) { return iso.dB(t); }, cs, q);
      CHECK(gas.A(q) == doctest::Approx(a).epsilon(1e-10));
      CHECK(gas.B(q) == doctest::Approx(b).epsilon(1e-10));
      CHECK(gas.dA(q) == doctest::Approx(iso.dA(q)).epsilon(1e-12));
      CHECK(gas.dB(q) == doctest::Approx(iso.dB(q)).epsilon(1e-12));
      if (q > cs) CHECK(gas.H(q) == doctest::Approx(iso.nu(q)).epsilon(1e-10));
    }
  }
}

TEST_CASE("derivatives agree with finite differences at random points") {
  const GasModel gas(1.4);
  const double cs = gas.c_star();
  auto rng = fixtures::rng(7);
  std::uniform_real_distribution<double> sub(0.1 * cs, 0.95 * cs), sup(1.05 * cs, 0.7 * gas.q_max());
  for (int k = 0; k < 50; ++k) {
    for (double q : {sub(rng), sup(rng)}) {
      const double h = 1e-4 * q;
      CHECK(gas.dA(q) == doctest::Approx(fd([&](double t) { return gas.A(t); }, q, h)).epsilon(1e-6));
      CHECK(gas.dB(q) == doctest::Approx(fd([&](double t) { return gas.B(t); }, q, h)).epsilon(1e-6));
      CHECK(gas.d2A(q) == doctest::Approx(fd([&](double t) { return gas.dA(t); }, q, h)).epsilon(1e-6));
      CHECK(gas.d2B(q) == doctest::Approx(fd([&](double t) { return gas.dB(t); }, q, h)).epsilon(1e-6));
    }
    // E on s = B(q) < 0, K on s = A(q) < 0 with q supersonic.
    const double qs = sub(rng), qp = sup(rng);
    const double s = gas.B(qs), hs = 1e-4 * std::abs(s);
    CHECK(gas.dE(s) == doctest::Approx(fd([&](double t) { return gas.E(t); }, s, hs)).epsilon(1e-6));
    CHECK(gas.d2E(s) == doctest::Approx(fd([&](double t) { return gas.dE(t); }, s, hs)).epsilon(1e-6));
    CHECK(gas.d3E(s) == doctest::Approx(fd([&](double t) { return gas.d2E(t); }, s, hs)).epsilon(1e-6));
    CHECK(gas.dE(s) == doctest::Approx(gas.dA(qs) / gas.dB(qs)).epsilon(1e-10));
    const double r = gas.A(qp), hr = 1e-4 * std::abs(r);
    CHECK(gas.dK(r) == doctest::Approx(fd([&](double t) { return gas.K(t); }, r, hr)).epsilon(1e-6));
    CHECK(gas.d2K(r) == doctest::Approx(fd([&](double t) { return gas.dK(t); }, r, hr)).epsilon(1e-6));
    CHECK(gas.dK(r) == doctest::Approx(gas.dB(qp) / gas.dA(qp)).epsilon(1e-10));
    CHECK(gas.b(r) == doctest::Approx(-gas.dK(r)).epsilon(1e-14));
    CHECK(gas.p(r) == doctest::Approx(-gas.d2K(r)).epsilon(1e-12));
  }
}

TEST_CASE("inverses round-trip") {
  const GasModel gas(1.4);
  const double cs = gas.c_star();
  auto rng = fixtures::rng(11);
  std::uniform_real_distribution<double> sub(0.02 * cs, 0.999 * cs), sup(1.001 * cs, 0.9 * gas.q_max());
  for (int k = 0; k < 50; ++k) {
    const double a = sub(rng), b = sup(rng);
    CHECK(gas.A_inv(gas.A(a), Branch::subsonic) == doctest::Approx(a).epsilon(1e-12));
    CHECK(gas.A_inv(gas.A(b), Branch::supersonic) == doctest::Approx(b).epsilon(1e-12));
    CHECK(gas.B_inv(gas.B(a)) == doctest::Approx(a).epsilon(1e-12));
    CHECK(gas.B_inv(gas.B(b)) == doctest::Approx(b).epsilon(1e-12));
    const double s = gas.B(a);
    CHECK(gas.E_inv(gas.E(s)) == doctest::Approx(s).epsilon(1e-12));
  }
  // Offsets keep relative accuracy right at the sonic point.
  for (double u : {1e-4, 1e-7, 1e-10, 1e-13}) {
    CHECK(gas.A_inv_offset(gas.A_offset(u), Branch::supersonic) == doctest::Approx(u).epsilon(1e-9));
    CHECK(gas.A_inv_offset(gas.A_offset(-u), Branch::subsonic) == doctest::Approx(-u).epsilon(1e-9));
    CHECK(gas.B_inv_offset(gas.B_offset(-u)) == doctest::Approx(-u).epsilon(1e-9));
  }
}

TEST_CASE("A peaks at the sonic speed and B increases") {
  const GasModel gas(1.4);
  const double cs = gas.c_star();
  std::vector<double> qs;
  for (int k = 1; k < 200; ++k) qs.push_back(0.9 * gas.q_max() * k / 200.0);
  for (size_t k = 0; k + 1 < qs.size(); ++k) {
    const double q0 = qs[k], q1 = qs[k + 1];
    CHECK(gas.A(q0) <= 0.0);
    CHECK(gas.B(q1) > gas.B(q0));
    if (q1 <= cs) CHECK(gas.A(q1) > gas.A(q0));
    if (q0 >= cs) CHECK(gas.A(q1) < gas.A(q0));
  }
}

TEST_CASE("characteristic slope and supersonic state are consistent") {
  const GasModel gas(1.4);
  for (double q : {1.001 * gas.c_star(), 1.1 * gas.c_star(), 1.5 * gas.c_star()}) {
    const laval::SupersonicState st = gas.supersonic_state(gas.A(q));
    CHECK(st.q == doctest::Approx(q).epsilon(1e-12));
    CHECK(st.sqrt_b == doctest::Approx(std::sqrt(st.b)).epsilon(1e-14));
    CHECK(gas.beta(q) == doctest::Approx(std::sqrt(-gas.dA(q) / gas.dB(q))).epsilon(1e-10));
    CHECK(gas.beta(q) * st.sqrt_b == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("gas functions reject arguments off their branch") {
  const GasModel gas(1.4);
  CHECK_THROWS_AS(gas.H(0.5 * gas.c_star()), laval::DomainError);
  CHECK_THROWS_AS(gas.A(1.01 * gas.q_max()), laval::DomainError);
  CHECK_THROWS_AS(gas.A(-0.1), laval::DomainError);
  CHECK_THROWS(GasModel(1.0));
}
