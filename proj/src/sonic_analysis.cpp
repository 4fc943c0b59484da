#include "laval/sonic_analysis.h"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <sstream>

#include "laval/errors.h"
#include "laval/interpolation.h"

namespace laval {
namespace {

// Interpolates q - c* so that nodes exactly at c* give exactly zero.
double bilinear_offset(const PotentialField& f, double cs, double phi, double psi) {
  const int n0 = static_cast<int>(f.phi.size()), n1 = static_cast<int>(f.psi.size());
  phi = std::clamp(phi, f.phi.front(), f.phi.back());
  psi = std::clamp(psi, f.psi.front(), f.psi.back());
  const int i = std::clamp(locate(f.phi, phi), 0, n0 - 2);
  const int j = std::clamp(locate(f.psi, psi), 0, n1 - 2);
  const double s = (phi - f.phi[i]) / (f.phi[i + 1] - f.phi[i]);
  const double t = (psi - f.psi[j]) / (f.psi[j + 1] - f.psi[j]);
  auto u = [&](int a, int b) { return f.q(a, b) - cs; };
  return (1 - s) * (1 - t) * u(i, j) + s * (1 - t) * u(i + 1, j) + (1 - s) * t * u(i, j + 1) +
         s * t * u(i + 1, j + 1);
}

double beta_at(const PotentialField& f, const GasModel& gas, double phi, double psi) {
  // Within the sonic band used by the classification the slope is zero.
  const double u = bilinear_offset(f, gas.c_star(), phi, psi);
  return u > 4.0 * DBL_EPSILON * gas.c_star() ? gas.beta(gas.c_star() + u) : 0.0;
}

// Classical RK4 for d phi/d psi = sign * beta from (phi0, psi0) to psi_end.
void integrate_in_psi(const PotentialField& f, const GasModel& gas, double phi0, double psi0,
                      double psi_end, double sign, int steps, std::vector<double>& psi,
                      std::vector<double>& phi) {
  const double lo = f.phi.front(), hi = f.phi.back();
  const double h = (psi_end - psi0) / steps;
  auto rhs = [&](double p, double y) { return sign * beta_at(f, gas, std::clamp(y, lo, hi), p); };
  double y = phi0;
  psi.assign(1, psi0);
  phi.assign(1, phi0);
  for (int k = 0; k < steps; ++k) {
    const double p = psi0 + k * h;
    const double k1 = rhs(p, y);
    const double k2 = rhs(p + 0.5 * h, y + 0.5 * h * k1);
    const double k3 = rhs(p + 0.5 * h, y + 0.5 * h * k2);
    const double k4 = rhs(p + h, y + h * k3);
    y = std::clamp(y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0, lo, hi);
    psi.push_back(psi0 + (k + 1) * h);
    phi.push_back(y);
  }
}

int psi_steps(const PotentialField& f, double span, int per_cell) {
  const double cell = (f.psi.back() - f.psi.front()) / (f.psi.size() - 1);
  return std::max(per_cell, static_cast<int>(std::ceil(per_cell * std::abs(span) / cell)));
}

}  // namespace

const char* segment_name(Segment s) {
  switch (s) {
    case Segment::minus: return "S-";
    case Segment::exceptional: return "Se";
    case Segment::plus: return "S+";
  }
  return "?";
}

SonicDiagnostics classify_sonic_points(const PotentialField& field, const GasModel& gas,
                                       const ClassifyOptions& opt) {
  const int n0 = static_cast<int>(field.phi.size()), n1 = static_cast<int>(field.psi.size());
  if (n0 < 2 || n1 < 2) throw DomainError("classify_sonic_points: field needs at least 2x2 nodes");
  const double cs = gas.c_star();
  const double level = opt.level_tol > 0.0 ? opt.level_tol : 4.0 * DBL_EPSILON * cs;
  double dpsi = std::numeric_limits<double>::infinity();
  for (int j = 0; j + 1 < n1; ++j) dpsi = std::min(dpsi, field.psi[j + 1] - field.psi[j]);
  const double floor = 64.0 * DBL_EPSILON * cs / dpsi;

  std::vector<std::vector<double>> cols(n0);
  for (int i = 0; i < n0; ++i) {
    cols[i].resize(n1);
    for (int j = 0; j < n1; ++j) cols[i][j] = field.q(i, j);
  }
  auto slope = [&](int i, double psi) { return lagrange_slope(field.psi, cols[i], psi); };
  auto d = [&](int i, int j) { return field.q(i, j) - cs; };
  auto sonic = [&](int i, int j) { return std::abs(d(i, j)) <= level; };

  // Estimate on column i by extrapolation from the side with the nearer
  // column a. The second column b is at least |phi_a - phi_i| beyond a, which
  // bounds the extrapolation factor by one on strongly graded grids.
  auto partner = [&](int i, int a, int step) {
    const double gap = std::abs(field.phi[a] - field.phi[i]);
    int b = a + step;
    while (b + step >= 0 && b + step < n0 && std::abs(field.phi[b] - field.phi[a]) < gap) b += step;
    return b;
  };
  auto on_column = [&](int i, double phi, double psi, double& est, double& err) {
    int a = -1, b = -1;
    double best = std::numeric_limits<double>::infinity();
    if (i >= 2 && field.phi[i] - field.phi[i - 1] < best) {
      best = field.phi[i] - field.phi[i - 1];
      a = i - 1;
      b = partner(i, a, -1);
    }
    if (i + 2 < n0 && field.phi[i + 1] - field.phi[i] < best) {
      a = i + 1;
      b = partner(i, a, 1);
    }
    if (a < 0) {
      est = slope(i, psi);
      err = 0.0;
      return;
    }
    const double sa = slope(a, psi), sb = slope(b, psi);
    est = sa + (phi - field.phi[a]) * (sa - sb) / (field.phi[a] - field.phi[b]);
    err = std::abs(est - sa);
  };

  SonicDiagnostics diag;
  auto add = [&](double phi, double psi, double est, double err) {
    SonicPoint p;
    p.phi = phi;
    p.psi = psi;
    p.qpsi = est;
    p.error = err;
    p.tolerance = opt.tol > 0.0 ? opt.tol : opt.error_factor * err + floor;
    p.exceptional = std::abs(est) <= p.tolerance;
    p.segment = p.exceptional ? Segment::exceptional : (est > 0.0 ? Segment::plus : Segment::minus);
    diag.points.push_back(p);
  };

  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      double est, err;
      if (sonic(i, j)) {
        on_column(i, field.phi[i], field.psi[j], est, err);
        add(field.phi[i], field.psi[j], est, err);
        continue;
      }
      // Edge roots: along phi (to i + 1) and along psi (to j + 1).
      if (i + 1 < n0 && !sonic(i + 1, j) && d(i, j) * d(i + 1, j) < 0.0) {
        const double t = d(i, j) / (d(i, j) - d(i + 1, j));
        const double phi = field.phi[i] + t * (field.phi[i + 1] - field.phi[i]);
        const double s0 = slope(i, field.psi[j]), s1 = slope(i + 1, field.psi[j]);
        add(phi, field.psi[j], (1 - t) * s0 + t * s1, std::abs(s1 - s0));
      }
      if (j + 1 < n1 && !sonic(i, j + 1) && d(i, j) * d(i, j + 1) < 0.0) {
        const double t = d(i, j) / (d(i, j) - d(i, j + 1));
        const double psi = field.psi[j] + t * (field.psi[j + 1] - field.psi[j]);
        on_column(i, field.phi[i], psi, est, err);
        add(field.phi[i], psi, est, err);
      }
    }
  }
  if (diag.points.empty()) throw DomainError("classify_sonic_points: no sonic level set found");

  std::sort(diag.points.begin(), diag.points.end(), [](const SonicPoint& a, const SonicPoint& b) {
    return a.psi != b.psi ? a.psi < b.psi : a.phi < b.phi;
  });
  for (size_t k = 0; k < diag.points.size(); ++k) {
    const SonicPoint& p = diag.points[k];
    const int idx = static_cast<int>(k);
    switch (p.segment) {
      case Segment::minus: diag.minus.push_back(idx); break;
      case Segment::exceptional: diag.exceptional.push_back(idx); break;
      case Segment::plus: diag.plus.push_back(idx); break;
    }
    diag.max_qpsi = std::max(diag.max_qpsi, std::abs(p.qpsi));
  }
  const auto& e = diag.exceptional;
  if (!e.empty()) diag.exceptional_contiguous = e.back() - e.front() + 1 == static_cast<int>(e.size());
  auto before = [](const std::vector<int>& a, const std::vector<int>& b) {
    return a.empty() || b.empty() || a.back() < b.front();
  };
  diag.order_consistent = before(diag.minus, e) && before(e, diag.plus) && before(diag.minus, diag.plus);
  diag.exceptional_fraction = static_cast<double>(e.size()) / diag.points.size();
  return diag;
}

SonicCharacteristics characteristics_from_sonic(const PotentialField& field, const GasModel& gas,
                                                const SonicPoint& point,
                                                const CharacteristicOptions& opt) {
  SonicCharacteristics out;
  out.phi0 = point.phi;
  out.psi0 = point.psi;
  out.exceptional = point.exceptional;
  const double m = field.psi.back();
  const bool at_top = point.psi >= m * (1.0 - 1e-12);
  const bool at_axis = point.psi <= field.psi.front() + 1e-12 * m;
  // Toward the supersonic side of a nonexceptional point.
  bool up = !at_top;
  if (point.segment == Segment::plus) up = true;
  if (point.segment == Segment::minus) up = false;
  out.inward = !(up && at_top) && !(!up && at_axis);
  if (!out.inward) up = !up;
  const double psi_end = up ? m : field.psi.front();
  const int steps = psi_steps(field, psi_end - point.psi, opt.steps_per_cell);
  std::vector<double> psi_minus;
  integrate_in_psi(field, gas, point.phi, point.psi, psi_end, 1.0, steps, out.psi, out.phi_plus);
  integrate_in_psi(field, gas, point.phi, point.psi, psi_end, -1.0, steps, psi_minus, out.phi_minus);
  for (size_t k = 0; k < out.psi.size(); ++k) {
    out.displacement = std::max({out.displacement, std::abs(out.phi_plus[k] - point.phi),
                                 std::abs(out.phi_minus[k] - point.phi)});
  }
  out.separation = std::abs(out.phi_plus.back() - out.phi_minus.back());
  const double extent = field.phi.back() - field.phi.front();
  out.coincident = out.displacement <= opt.coincidence_tol * extent;

  for (size_t i = 0; i < field.phi.size(); ++i) {
    const double dphi = field.phi[i] - point.phi;
    if (!(dphi > 0.0)) continue;
    for (size_t j = 0; j < field.psi.size(); ++j) {
      const double q = field.q(static_cast<int>(i), static_cast<int>(j));
      if (q > gas.c_star()) out.lipschitz = std::max(out.lipschitz, gas.beta(q) / dphi);
    }
  }
  if (out.inward && out.coincident != point.exceptional) {
    std::ostringstream msg;
    msg << "characteristics_from_sonic: classification mismatch at (" << point.phi << ", "
        << point.psi << "): " << (point.exceptional ? "exceptional" : "nonexceptional")
        << " point with displacement " << out.displacement;
    throw DomainError(msg.str());
  }
  return out;
}

std::vector<DriftStart> default_drift_starts(const SupersonicField& field, int count) {
  std::vector<DriftStart> starts;
  const double m = field.psi.back();
  for (int k = 0; k < count; ++k) {
    starts.push_back({0.5 * field.zeta_plus, (k + 0.5) * m / count,
                      k % 2 == 0 ? Family::plus : Family::minus});
  }
  return starts;
}

DriftReport riemann_invariant_drift(const SupersonicField& field, const FieldBlock& block,
                                    const GasModel& gas, const std::vector<DriftStart>& starts,
                                    double margin, const TraceOptions& trace) {
  if (block.theta.empty()) throw std::invalid_argument("riemann_invariant_drift: block has no theta");
  const double cs = gas.c_star();
  int cut = 0;
  while (cut < static_cast<int>(field.phi.size()) && field.phi[cut] < field.eps_cut) ++cut;
  const std::vector<double> px(field.phi.begin() + cut, field.phi.end());
  const int n0 = static_cast<int>(px.size()), n1 = static_cast<int>(field.psi.size());
  Field2D Qs(n0, n1), Ts(n0, n1);
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      Qs(i, j) = field.Q(cut + i, j);
      Ts(i, j) = block.theta(cut + i, j);
    }
  }
  const GridInterpolator Qi(px, field.psi, Qs), Ti(px, field.psi, Ts);

  DriftReport rep;
  for (const DriftStart& s : starts) {
    const CharacteristicPath path = trace_characteristic(field, gas, s.phi, s.psi, s.family, trace);
    PathDrift pd;
    pd.start = s;
    pd.bounces = static_cast<int>(path.bounce_phi.size());
    pd.samples = static_cast<int>(path.phi.size());
    double h_max = 0.0, ref = 0.0;
    int segment = -1;
    for (size_t k = 0; k < path.phi.size(); ++k) {
      const double phi = std::max(path.phi[k], field.eps_cut);
      const double psi = std::clamp(path.psi[k], 0.0, field.psi.back());
      int seg = 0;
      while (seg < pd.bounces && path.bounce_phi[seg] >= path.phi[k]) ++seg;
      const bool plus = (s.family == Family::plus) == (seg % 2 == 0);
      const double Q = std::min(Qi(phi, psi), 0.0);
      const double q = cs + (Q < 0.0 ? gas.A_inv_offset(Q, Branch::supersonic) : 0.0);
      if (q - cs < margin) {
        std::ostringstream msg;
        msg << "riemann_invariant_drift: path leaves the supersonic margin at (" << phi << ", "
            << psi << ")";
        throw DomainError(msg.str());
      }
      const double H = q > cs ? gas.H(q) : 0.0;
      const double I = Ti(phi, psi) + (plus ? -H : H);
      h_max = std::max(h_max, H);
      if (seg != segment) {
        segment = seg;
        ref = I;
      }
      pd.drift = std::max(pd.drift, std::abs(I - ref));
    }
    pd.relative = h_max > 0.0 ? pd.drift / h_max : pd.drift;
    rep.max_drift = std::max(rep.max_drift, pd.drift);
    rep.max_relative = std::max(rep.max_relative, pd.relative);
    rep.paths.push_back(pd);
  }
  return rep;
}

CurvatureReport wall_curvature_check(const NozzleSpec& spec, const SonicDiagnostics& diag,
                                     const PotentialField& field, const GasModel& gas,
                                     const std::function<double(double)>& wall_x, int samples) {
  CurvatureReport rep;
  if (diag.plus.empty()) {
    rep.vacuous = true;
    rep.note = "no S+ segment: the sonic line carries no negative characteristic to the wall";
    return rep;
  }
  const double m = field.psi.back();
  const SonicPoint& top = diag.points[diag.plus.back()];
  rep.x1 = wall_x(top.phi);
  rep.x_star = rep.x1;
  for (int idx : diag.plus) {
    const SonicPoint& p = diag.points[idx];
    if (p.psi >= m) continue;
    std::vector<double> ps, ph;
    integrate_in_psi(field, gas, p.phi, p.psi, m, -1.0, psi_steps(field, m - p.psi, 4), ps, ph);
    const double x = wall_x(ph.back());
    if (std::abs(x - rep.x1) > std::abs(rep.x_star - rep.x1)) rep.x_star = x;
  }
  const double a = std::min(rep.x1, rep.x_star), b = std::max(rep.x1, rep.x_star);
  rep.min_d2f = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= samples; ++k) {
    const double x = a + (b - a) * k / samples;
    rep.min_d2f = std::min(rep.min_d2f, spec.wall.d2f(x));
  }
  rep.passed = rep.min_d2f > 0.0;
  rep.note = rep.passed ? "f'' > 0 on the footprint" : "f'' <= 0 on the footprint";
  return rep;
}

}  // namespace laval
