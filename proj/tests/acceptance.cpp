// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "laval/assembly.h"
#include "laval/config.h"
#include "laval/fitting.h"
#include "laval/gas_model.h"
#include "laval/grid.h"
#include "laval/pipeline.h"
#include "laval/subsonic.h"
#include "laval/supersonic.h"

using namespace laval;

namespace {

int failures = 0;

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void report(int id, const std::string& name, bool ok, const std::string& detail, double seconds) {
  if (!ok) ++failures;
  std::printf("%s  %2d %-28s %s  [%.1f s]\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

template <class F>
double fd(F&& f, double x, double h) {
  return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12.0 * h);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

const FitRow& row(const std::vector<FitRow>& rows, const std::string& name) {
  for (const FitRow& r : rows) {
    if (r.name == name) return r;
  }
  throw std::runtime_error("missing fit row " + name);
}

RunConfig base_config() {
  RunConfig c;
  c.gamma = 1.4;
  c.nozzle.lambda_minus = 3.0;
  c.nozzle.lambda_plus = 3.0;
  c.nozzle.delta = 0.1;
  c.nozzle.l_minus = -0.3;
  c.nozzle.l_plus = 0.3;
  return c;
}

bool decreasing(const std::vector<double>& v) {
  for (size_t k = 1; k < v.size(); ++k) {
    if (!(v[k] < v[k - 1])) return false;
  }
  return true;
}

double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

void gas_suite() {
  Timer t;
  const GasModel gas(1.4);
  const double cs = gas.c_star();
  std::mt19937_64 rng(20261014);
  std::uniform_real_distribution<double> sub(0.05 * cs, 0.97 * cs), sup(1.03 * cs, 0.8 * gas.q_max());
  double d_err = 0.0, inv_err = 0.0;
  auto check = [&](auto&& f, double df, double x) {
    d_err = std::max(d_err, rel(df, fd(f, x, 1e-3 * std::abs(x))));
  };
  for (int k = 0; k < 50; ++k) {
    for (double q : {sub(rng), sup(rng)}) {
      check([&](double v) { return gas.A(v); }, gas.dA(q), q);
      check([&](double v) { return gas.B(v); }, gas.dB(q), q);
      check([&](double v) { return gas.dA(v); }, gas.d2A(q), q);
      check([&](double v) { return gas.dB(v); }, gas.d2B(q), q);
    }
    const double s = gas.B(sub(rng));
    check([&](double v) { return gas.E(v); }, gas.dE(s), s);
    check([&](double v) { return gas.dE(v); }, gas.d2E(s), s);
    check([&](double v) { return gas.d2E(v); }, gas.d3E(s), s);
    const double g = gas.E(s);
    check([&](double v) { return gas.G(v); }, gas.dG(g), g);
    const double r = gas.A(sup(rng));
    check([&](double v) { return gas.K(v); }, gas.dK(r), r);
    check([&](double v) { return gas.dK(v); }, gas.d2K(r), r);

    const double a = sub(rng), b = sup(rng);
    inv_err = std::max({inv_err, rel(gas.A_inv(gas.A(a), Branch::subsonic), a),
                        rel(gas.A_inv(gas.A(b), Branch::supersonic), b), rel(gas.B_inv(gas.B(a)), a),
                        rel(gas.B_inv(gas.B(b)), b), rel(gas.E_inv(gas.E(s)), s),
                        rel(gas.supersonic_state(gas.A(b)).q, b)});
  }
  const double slope = std::abs(gas.dA(cs));
  const double secs = t.seconds();
  report(1, "gas functions", d_err <= 1e-6 && inv_err <= 1e-12 && slope <= 1e-10 && secs < 5.0,
         fmt("derivative rel err %.2e (<=1e-6), inverse rel err %.2e (<=1e-12), |A'(c*)| %.1e (<=1e-10)", d_err,
             inv_err, slope),
         secs);
}

void straight_channel() {
  Timer t;
  const GasModel gas(1.4);
  const double cs = gas.c_star(), rho = gas.density(cs * cs);
  RunConfig c = base_config();
  c.nozzle.delta = 0.0;
  c.subsonic.n_phi = 64;
  c.subsonic.n_psi = 16;
  c.supersonic.n_psi = 16;
  const NozzleSpec spec = make_spec(c);
  double sub_dev = 0.0, sup_dev = 0.0, map_dev = 0.0;
  SubsonicField sub = subsonic_fixed_point(spec, gas, c.subsonic, cs);
  for (double v : sub.q.data()) sub_dev = std::max(sub_dev, std::abs(v - cs));
  // The regularized problem reproduces any outlet value.
  SubsonicOptions o = c.subsonic;
  const SubsonicProblem pb = make_subsonic_problem(spec, gas, sub.maps, o);
  const SubsonicField half = solve_regularized(pb, gas, 0.5 * cs, o);
  for (double v : half.q.data()) sub_dev = std::max(sub_dev, std::abs(v - 0.5 * cs));
  SupersonicField sup = supersonic_fixed_point(spec, gas, c.supersonic);
  for (double v : sup.Q.data()) sup_dev = std::max(sup_dev, std::abs(v));
  TransonicSolution sol = connect(&sub, &sup, gas);
  reconstruct_theta(sol, gas);
  to_physical(sol, gas);
  for (const FieldBlock* b : {&sol.sub, &sol.sup}) {
    for (size_t i = 0; i < b->phi.size(); ++i) {
      for (size_t j = 0; j < b->psi.size(); ++j) {
        const int ii = static_cast<int>(i), jj = static_cast<int>(j);
        map_dev = std::max({map_dev, std::abs(b->x(ii, jj) - b->phi[i] / cs),
                            std::abs(b->y(ii, jj) - b->psi[j] / (rho * cs)), std::abs(b->theta(ii, jj)),
                            std::abs(b->q(ii, jj) - cs)});
      }
    }
  }
  const double secs = t.seconds();
  report(2, "straight-channel exactness",
         sub_dev <= 1e-12 && sup_dev == 0.0 && map_dev <= 1e-12 && secs < 5.0,
         fmt("max|q-c| %.1e (<=1e-12), max|Q| %.1e (==0), uniform-map deviation %.1e (<=1e-12)", sub_dev,
             sup_dev, map_dev),
         secs);
}

void subsonic_rate() {
  Timer t;
  const RunConfig c = base_config();  // 256 x 64
  const GasModel gas(c.gamma);
  const NozzleSpec spec = make_spec(c);
  const SubsonicField sub = subsonic_fixed_point(spec, gas, c.subsonic, gas.c_star());
  const double secs = t.seconds();
  const FitRow r = row(fit_report(&sub, nullptr, spec, gas, c.fit_lo, c.fit_hi), "subsonic_offset");
  report(3, "subsonic rate", r.passed && secs < 60.0,
         fmt("exponent %.4f (2.5 +- 10%%), R^2 %.6f, %.0f points, grid 256x64", r.measured, r.r_squared,
             r.points),
         secs);
}

void supersonic_rates() {
  Timer t;
  RunConfig c = base_config();
  c.supersonic.n_psi = 64;
  const GasModel gas(c.gamma);
  const NozzleSpec spec = make_spec(c);
  const SupersonicField sup = supersonic_fixed_point(spec, gas, c.supersonic);
  const double secs = t.seconds();
  const std::vector<FitRow> rows = fit_report(nullptr, &sup, spec, gas, c.fit_lo, c.fit_hi);
  const FitRow &q = row(rows, "supersonic_Q"), &qp = row(rows, "supersonic_Q_phi"),
               &qs = row(rows, "supersonic_Q_psi"), &h = row(rows, "wall_source_h");
  report(4, "supersonic rates", q.passed && qp.passed && qs.passed && secs < 120.0,
         fmt("-Q ~ phi^%.4f (5 +- 0.5), -Q_phi ~ phi^%.4f (4 +- 0.6), |Q_psi| ~ phi^%.4f (>= 4.95)", q.measured,
             qp.measured, qs.measured),
         secs);
  report(5, "wall source exponent", h.passed, fmt("h ~ phi^%.4f (4.25 +- 10%%), R^2 %.6f", h.measured, h.r_squared),
         0.0);
}

void refinement_criteria() {
  Timer t;
  RunConfig c = base_config();
  c.subsonic.n_phi = 64;
  c.subsonic.n_psi = 16;
  c.supersonic.n_psi = 16;
  c.study = RunMode::transonic;
  const ConvergenceTable tab = convergence_study(c, 3);
  const double secs = t.seconds();
  std::vector<double> drift, qpsi, gap, minus, plus, exc;
  for (const LevelResult& L : tab.levels) {
    drift.push_back(L.drift);
    qpsi.push_back(L.qpsi_sonic);
    gap.push_back(L.qphi_gap);
    minus.push_back(L.qphi_minus);
    plus.push_back(L.qphi_plus);
    exc.push_back(L.exceptional_fraction);
  }
  const LevelResult& fine = tab.levels.back();

  const double ratio = drift[2] / drift[1];
  report(6, "Riemann-invariant drift", drift[2] <= 1e-3 && ratio <= 0.5,
         fmt("max relative drift %.2e at 256x64 (<=1e-3), refinement ratio %.3f (<=0.5); coarser %.2e", drift[2],
             ratio, drift[1]),
         secs);

  const std::vector<double> qo = observed_orders(qpsi);
  report(7, "exceptional sonic line", min_of(exc) == 1.0 && min_of(qo) >= 1.0,
         fmt("exceptional fraction min %.3f (==1), max|q_psi| %.2e -> %.2e -> %.2e", min_of(exc), qpsi[0], qpsi[1],
             qpsi[2]) +
             fmt(", orders %.2f %.2f (>=1)", qo[0], qo[1]),
         0.0);

  const std::vector<double> go = observed_orders(gap);
  report(8, "C1,1 matching", min_of(go) >= 1.0 && decreasing(minus) && decreasing(plus),
         fmt("q_phi gap %.2e -> %.2e -> %.2e, orders %.2f", gap[0], gap[1], gap[2], go[0]) +
             fmt(" %.2f (>=1); q_phi(0-) %.2e, q_phi(0+) %.2e at finest, both decreasing", go[1], minus[2], plus[2]),
         0.0);

  report(11, "physical-plane closure",
         fine.wall_error <= 0.02 && fine.flux_drift <= 0.005 && fine.mass_mismatch <= 1e-6,
         fmt("wall error %.2e (<=2%%), station flux drift %.2e (<=0.5%%), |m_in-m|/m %.2e (<=1e-6)",
             fine.wall_error, fine.flux_drift, fine.mass_mismatch),
         0.0);
}

void uniqueness() {
  Timer t;
  RunConfig c = base_config();
  c.subsonic.n_phi = 64;
  c.subsonic.n_psi = 16;
  c.supersonic.n_psi = 16;
  const GasModel gas(c.gamma);
  const NozzleSpec spec = make_spec(c);
  const double cs = gas.c_star();
  RunConfig c2 = c;
  c2.subsonic_seed_c2 = 2.0;
  const SubsonicField a = subsonic_fixed_point(spec, gas, c.subsonic, cs);
  const SubsonicField b = subsonic_fixed_point(spec, gas, c.subsonic, subsonic_seed_speed(c2, gas));
  double dsub = 0.0;
  for (size_t k = 0; k < a.q.data().size(); ++k) dsub = std::max(dsub, std::abs(a.q.data()[k] - b.q.data()[k]));
  SupersonicOptions o2 = c.supersonic;
  o2.seed_scale = 2.0;
  const SupersonicField p = supersonic_fixed_point(spec, gas, c.supersonic);
  const SupersonicField r = supersonic_fixed_point(spec, gas, o2);
  double dsup = 0.0, qmax = 0.0;
  for (size_t k = 0; k < p.Q.data().size(); ++k) {
    dsup = std::max(dsup, std::abs(p.Q.data()[k] - r.Q.data()[k]));
    qmax = std::max(qmax, std::abs(p.Q.data()[k]));
  }
  report(9, "seed independence", dsub <= 1e-6 && dsup <= 1e-6,
         fmt("subsonic seeds %.4f/%.4f: max|dq| %.2e (<=1e-6); supersonic seed x1/x2: max|dQ| %.2e (<=1e-6)", cs,
             subsonic_seed_speed(c2, gas), dsub, dsup) +
             fmt(", relative %.2e", dsup / qmax),
         t.seconds());
}

void comparison_suite() {
  Timer t;
  const GasModel gas(1.4);
  const double cs = gas.c_star();
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int violations = 0, cases = 0;
  long checks = 0;
  for (int k = 0; k < 20; ++k, ++cases) {
    const double lm = -0.2 - 0.15 * U(rng), lam = 2.5 + 1.5 * U(rng), del = 0.02 + 0.13 * U(rng);
    const NozzleSpec spec = default_wall(lm, 0.3, 1.0, lam, 3.0, del);
    SubsonicOptions o;
    o.n_phi = 32;  // 33 x 17 nodes
    o.n_psi = 16;
    const double seed = cs * (0.5 + 0.45 * U(rng));
    SpeedSamples in, wall;
    in.s = uniform_nodes(0.0, spec.inlet_height(), 2 * o.n_psi);
    in.q.assign(in.s.size(), seed);
    wall.s = graded_nodes(lm, 0.0, 2 * o.n_phi, o.grading_ratio, o.max_stretch, ClusterEnd::upper);
    wall.q.assign(wall.s.size(), seed);
    const SubsonicProblem pb = make_subsonic_problem(spec, gas, build_maps(spec, gas, in, wall, {}), o);
    const double c1 = cs * (0.35 + 0.15 * U(rng));
    const double c2 = c1 + cs * (0.02 + 0.3 * U(rng));
    const SubsonicField f1 = solve_regularized(pb, gas, c1, o), f2 = solve_regularized(pb, gas, c2, o);
    for (size_t i = 0; i < f1.phi.size(); ++i) {
      for (size_t j = 0; j < f1.psi.size(); ++j) {
        const int ii = static_cast<int>(i), jj = static_cast<int>(j);
        const double lower = subsonic_subsolution(gas, cs / 3.0, 1.0, f1.phi[i]);
        if (f1.q(ii, jj) > f2.q(ii, jj)) ++violations;
        if (f1.q(ii, jj) > subsonic_supersolution(cs, f1.phi[i], f1.psi[j], 0.0)) ++violations;
        if (f1.q(ii, jj) < lower || f2.q(ii, jj) < lower) ++violations;
        checks += 4;
      }
    }
  }
  report(10, "comparison principle", violations == 0,
         fmt("%.0f violations in %.0f pointwise checks over %.0f randomized cases at 33x17", violations,
             static_cast<double>(checks), cases),
         t.seconds());
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> steps = {gas_suite,        straight_channel,    subsonic_rate,
                                                    supersonic_rates, refinement_criteria, uniqueness,
                                                    comparison_suite};
  for (const auto& step : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      ++failures;
      std::printf("FAIL  step aborted: %s\n", e.what());
    }
  }
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
