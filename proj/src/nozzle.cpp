#include "laval/nozzle.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "laval/errors.h"

namespace laval {

double NozzleSpec::wall_angle(double x) const { return std::atan(wall.df(x)); }

double NozzleSpec::wall_angle_rate(double x) const {
  const double d = wall.df(x);
  return wall.d2f(x) / (1.0 + d * d);
}

double NozzleSpec::inlet_angle(double y) const { return -std::atan(inlet.dg(y)); }

double NozzleSpec::inlet_angle_rate(double y) const {
  const double d = inlet.dg(y);
  return -inlet.d2g(y) / (1.0 + d * d);
}

NozzleSpec default_wall(double l_minus, double l_plus, double f0, double lambda_minus,
                        double lambda_plus, double delta) {
  if (!(l_minus < 0.0) || !(l_plus > 0.0)) {
    throw std::invalid_argument("default_wall: need l_minus < 0 < l_plus");
  }
  if (!(f0 > 0.0)) throw std::invalid_argument("default_wall: f0 must be positive");
  if (!(lambda_minus > 2.0) || !(lambda_plus > 2.0)) {
    throw std::invalid_argument("default_wall: lambda_minus and lambda_plus must exceed 2");
  }
  if (!(delta >= 0.0)) throw std::invalid_argument("default_wall: delta must be >= 0");

  NozzleSpec spec;
  spec.l_minus = l_minus;
  spec.l_plus = l_plus;
  spec.f0 = f0;
  spec.lambda_minus = lambda_minus;
  spec.lambda_plus = lambda_plus;
  spec.delta1_minus = spec.delta2_minus = delta;
  spec.delta1_plus = spec.delta2_plus = delta;

  const double lm = lambda_minus, lp = lambda_plus;
  auto lam = [lm, lp](double x) { return x < 0.0 ? lm : lp; };
  spec.wall.f = [=](double x) {
    const double l = lam(x);
    return f0 + delta * std::pow(std::abs(x), l + 2.0) / ((l + 1.0) * (l + 2.0));
  };
  spec.wall.df = [=](double x) {
    const double l = lam(x);
    const double v = delta * std::pow(std::abs(x), l + 1.0) / (l + 1.0);
    return x < 0.0 ? -v : v;
  };
  spec.wall.d2f = [=](double x) { return delta * std::pow(std::abs(x), lam(x)); };
  spec.wall.d3f = [=](double x) {
    const double l = lam(x);
    const double v = l * delta * std::pow(std::abs(x), l - 1.0);
    return x < 0.0 ? -v : v;
  };

  // Circular arc through (l_minus, f(l_minus)) meeting the wall at a right
  // angle, centred on the axis. Written with the curvature kappa = 1/R0 so the
  // straight channel (kappa = 0) needs no special case and nothing cancels.
  const double fl = spec.wall.f(l_minus);
  const double dfl = spec.wall.df(l_minus);
  const double root = std::sqrt(1.0 + dfl * dfl);
  const double kappa = -dfl / (fl * root);
  const double shift = fl * dfl / (1.0 + root);
  spec.inlet.g = [=](double y) {
    return l_minus + shift + kappa * y * y / (1.0 + std::sqrt(1.0 - kappa * kappa * y * y));
  };
  spec.inlet.dg = [=](double y) { return kappa * y / std::sqrt(1.0 - kappa * kappa * y * y); };
  spec.inlet.d2g = [=](double y) { return kappa / std::pow(1.0 - kappa * kappa * y * y, 1.5); };
  return spec;
}

bool AdmissibilityReport::passed() const {
  return std::all_of(conditions.begin(), conditions.end(),
                     [](const ConditionResult& c) { return c.passed; });
}

const ConditionResult& AdmissibilityReport::find(const std::string& name) const {
  for (const auto& c : conditions) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no admissibility condition named " + name);
}

namespace {

constexpr int kSamples = 201;

// Checks d1 |x|^lambda <= f'' <= d2 |x|^lambda over the open side, relative
// slack 1e-9. Records the worst relative violation.
ConditionResult curvature_envelope(const NozzleSpec& spec, double a, double b, double lambda,
                                   double d1, double d2, const char* name) {
  ConditionResult r;
  r.name = name;
  if (!(lambda > 2.0)) {
    r.passed = false;
    r.note = "curvature exponent must exceed 2";
    return r;
  }
  if (!(d1 > 0.0) || !(d2 >= d1)) {
    r.passed = false;
    r.note = "envelope constants must satisfy 0 < delta1 <= delta2";
    return r;
  }
  double worst = 0.0;
  for (int k = 0; k < kSamples; ++k) {
    const double x = a + (b - a) * (k + 0.5) / kSamples;
    const double w = std::pow(std::abs(x), lambda);
    const double f2 = spec.wall.d2f(x);
    const double lo = d1 * w * (1.0 - 1e-9), hi = d2 * w * (1.0 + 1e-9);
    double v = 0.0;
    if (f2 < lo) v = (lo - f2) / (d1 * w);
    if (f2 > hi) v = (f2 - hi) / (d2 * w);
    if (v > worst) {
      worst = v;
      r.worst_x = x;
    }
  }
  r.worst_value = worst;
  r.passed = worst == 0.0;
  if (!r.passed) r.note = "wall curvature leaves the power-law envelope";
  return r;
}

// sup over the side of |f'''| / |x|^power, as a measured constant.
ConditionResult third_derivative_constant(const NozzleSpec& spec, double a, double b,
                                          double power, const char* name) {
  ConditionResult r;
  r.name = name;
  double sup = 0.0;
  for (int k = 0; k < kSamples; ++k) {
    const double x = a + (b - a) * (k + 0.5) / kSamples;
    const double v = std::abs(spec.wall.d3f(x)) / std::pow(std::abs(x), power);
    if (v > sup) {
      sup = v;
      r.worst_x = x;
    }
  }
  r.worst_value = sup;
  r.passed = std::isfinite(sup);
  std::ostringstream note;
  note << "measured constant " << sup;
  r.note = note.str();
  return r;
}

}  // namespace

AdmissibilityReport validate(const NozzleSpec& spec, double length_warning) {
  AdmissibilityReport rep;
  const double lm = spec.l_minus, lp = spec.l_plus;

  rep.conditions.push_back(curvature_envelope(spec, lm, 0.0, spec.lambda_minus,
                                              spec.delta1_minus, spec.delta2_minus,
                                              "upstream_curvature"));
  {
    ConditionResult r = curvature_envelope(spec, 0.0, lp, spec.lambda_plus, spec.delta1_plus,
                                           spec.delta2_plus, "downstream_curvature");
    // f''' >= 0 downstream
    double worst = 0.0;
    for (int k = 0; k < kSamples; ++k) {
      const double x = lp * (k + 0.5) / kSamples;
      const double v = spec.wall.d3f(x);
      if (v < -1e-14 && -v > worst) {
        worst = -v;
        if (r.passed) r.worst_x = x;
      }
    }
    if (worst > 0.0) {
      r.passed = false;
      r.note = r.note.empty() ? "f''' negative downstream" : r.note + "; f''' negative downstream";
    }
    rep.conditions.push_back(r);
  }

  const double h = spec.inlet_height();
  {
    ConditionResult r;
    r.name = "inlet_compatibility";
    const double e1 = std::abs(spec.inlet.dg(0.0));
    const double e2 = std::abs(spec.inlet.g(h) - lm);
    const double e3 = std::abs(spec.inlet.dg(h) + spec.wall.df(lm));
    r.worst_value = std::max({e1, e2, e3});
    r.worst_x = e1 >= e2 && e1 >= e3 ? 0.0 : h;
    r.passed = r.worst_value <= 1e-10;
    if (!r.passed) r.note = "inlet arc does not meet the axis and the wall orthogonally";
    rep.conditions.push_back(r);
  }
  {
    ConditionResult r;
    r.name = "inlet_curvature";
    const double dfl = spec.wall.df(lm);
    if (!(dfl < 0.0)) {
      r.passed = false;
      r.note = "wall slope at the inlet must be negative";
    } else {
      const double r0 = h * std::sqrt(dfl * dfl + 1.0) / (-dfl);
      auto kappa = [&spec](double y) {
        const double d = spec.inlet.dg(y);
        return spec.inlet.d2g(y) / std::pow(1.0 + d * d, 1.5);
      };
      const double bound2 = std::abs(lm) * std::pow(std::abs(lm), 1.5 * spec.lambda_minus);
      const double dy = 1e-4 * h;
      double worst = 0.0;
      for (int k = 0; k < kSamples; ++k) {
        const double y = h * k / (kSamples - 1.0);
        const double kv = kappa(y);
        double v = 0.0;
        if (kv < 0.5 / r0) v = 0.5 / r0 - kv;
        if (kv > 1.5 / r0) v = kv - 1.5 / r0;
        const double ya = std::max(0.0, y - dy), yb = std::min(h, y + dy);
        const double slope = std::abs(kappa(yb) - kappa(ya)) / (yb - ya);
        if (slope > bound2) v = std::max(v, slope - bound2);
        if (v > worst) {
          worst = v;
          r.worst_x = y;
        }
      }
      r.worst_value = worst;
      r.passed = worst == 0.0;
      if (!r.passed) r.note = "inlet curvature outside [1/(2 R0), 3/(2 R0)] or varies too fast";
    }
    rep.conditions.push_back(r);
  }
  rep.conditions.push_back(third_derivative_constant(spec, 0.0, lp, spec.lambda_plus - 1.0,
                                                     "downstream_third_derivative"));
  rep.conditions.push_back(third_derivative_constant(
      spec, lm, 0.0, 0.25 * spec.lambda_minus + 0.5, "upstream_third_derivative"));

  if (std::abs(lm) > length_warning) {
    rep.warnings.push_back("|l_minus| is large; the admissible length is not explicit, so the "
                           "subsonic fixed point may diverge");
  }
  if (std::abs(lp) > length_warning) {
    rep.warnings.push_back("|l_plus| is large; the admissible length is not explicit, so the "
                           "supersonic fixed point may diverge");
  }
  return rep;
}

double mass_flux(const NozzleSpec& spec, const GasModel& gas) {
  return spec.f0 * std::pow(gas.c_star(), 1.0 + 2.0 / (gas.gamma() - 1.0));
}

namespace {

// Cumulative trapezoid; throws if the result is not strictly increasing.
std::vector<double> cumulative(const std::vector<double>& s, const std::vector<double>& v,
                               const char* what) {
  std::vector<double> out(s.size(), 0.0);
  for (size_t i = 1; i < s.size(); ++i) {
    out[i] = out[i - 1] + 0.5 * (s[i] - s[i - 1]) * (v[i] + v[i - 1]);
    if (!(out[i] > out[i - 1])) {
      std::ostringstream msg;
      msg << what << ": boundary map not strictly monotone at sample " << i;
      throw std::runtime_error(msg.str());
    }
  }
  return out;
}

void check_samples(const SpeedSamples& smp, const char* what) {
  if (smp.s.size() != smp.q.size() || smp.s.size() < 3) {
    throw std::invalid_argument(std::string(what) + ": need >= 3 matching samples");
  }
  for (size_t i = 0; i < smp.q.size(); ++i) {
    if (!(smp.q[i] > 0.0) || !std::isfinite(smp.q[i])) {
      throw std::runtime_error(std::string(what) + ": nonpositive speed sample");
    }
  }
}

}  // namespace

BoundaryMaps build_maps(const NozzleSpec& spec, const GasModel& gas, const SpeedSamples& q_in,
                        const SpeedSamples& q_wall_minus, const SpeedSamples& q_wall_plus) {
  BoundaryMaps maps;
  maps.m = mass_flux(spec, gas);
  maps.q_in = q_in;
  maps.q_wall_minus = q_wall_minus;
  maps.q_wall_plus = q_wall_plus;

  if (!q_wall_minus.empty()) {
    check_samples(q_in, "inlet samples");
    check_samples(q_wall_minus, "upstream wall samples");
    // inlet: y from 0 to f(l_minus)
    std::vector<double> v(q_in.s.size());
    for (size_t i = 0; i < v.size(); ++i) {
      const double y = q_in.s[i], q = q_in.q[i];
      v[i] = q * gas.density(q * q) / std::cos(spec.inlet_angle(y));
    }
    std::vector<double> psi = cumulative(q_in.s, v, "inlet");
    maps.m_in = psi.back();
    maps.Psi_in = MonotoneCubic(q_in.s, psi);
    maps.Y_in = MonotoneCubic(psi, q_in.s);

    // upstream wall: x from l_minus to 0, phi(0) = 0
    const auto& xs = q_wall_minus.s;
    std::vector<double> w(xs.size());
    for (size_t i = 0; i < w.size(); ++i) {
      w[i] = q_wall_minus.q[i] / std::cos(spec.wall_angle(xs[i]));
    }
    std::vector<double> phi = cumulative(xs, w, "upstream wall");
    const double shift = phi.back();
    for (double& p : phi) p -= shift;
    phi.back() = 0.0;
    maps.zeta_minus = phi.front();
    maps.Phi_minus = MonotoneCubic(xs, phi);
    maps.X_minus = MonotoneCubic(phi, xs);
  }

  if (!q_wall_plus.empty()) {
    check_samples(q_wall_plus, "downstream wall samples");
    const auto& xs = q_wall_plus.s;
    std::vector<double> w(xs.size());
    for (size_t i = 0; i < w.size(); ++i) {
      w[i] = q_wall_plus.q[i] / std::cos(spec.wall_angle(xs[i]));
    }
    std::vector<double> phi = cumulative(xs, w, "downstream wall");
    maps.zeta_plus = phi.back();
    maps.Phi_plus = MonotoneCubic(xs, phi);
    maps.X_plus = MonotoneCubic(phi, xs);
  }
  return maps;
}

}  // namespace laval
