#include "laval/assembly.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "laval/errors.h"
#include "laval/interpolation.h"

namespace laval {
namespace {

// d/dpsi of a column sampled on uniform psi nodes, using the even extension
// across the axis; exactly zero on the axis.
std::vector<double> psi_slope_even(const std::vector<double>& psi, const std::vector<double>& v) {
  const int n = static_cast<int>(psi.size());
  std::vector<double> out(n, 0.0);
  if (n < 3) return out;
  std::vector<double> y(n + 2), w(n + 2);
  y[0] = -psi[2];
  y[1] = -psi[1];
  w[0] = v[2];
  w[1] = v[1];
  for (int j = 0; j < n; ++j) {
    y[j + 2] = psi[j];
    w[j + 2] = v[j];
  }
  for (int j = 1; j < n; ++j) out[j] = lagrange_slope(y, w, psi[j]);
  return out;
}

std::vector<double> row(const Field2D& f, int j) {
  std::vector<double> r(f.n0());
  for (int i = 0; i < f.n0(); ++i) r[i] = f(i, j);
  return r;
}

std::vector<double> column(const Field2D& f, int i) {
  std::vector<double> c(f.n1());
  for (int j = 0; j < f.n1(); ++j) c[j] = f(i, j);
  return c;
}

// Running integral along phi from the sonic end of a block. For the
// supersonic block the first cell [0, phi_1] is a trapezoid and the cubic
// stencils start at first_fine_row.
std::vector<double> integrate_from_sonic(const FieldBlock& b, const std::vector<double>& g,
                                         bool sub_side) {
  const int n = static_cast<int>(b.phi.size());
  if (sub_side) return cumulative_cubic(b.phi, g, n - 1, 0);
  const int f = std::max(b.first_fine_row, 0);
  if (f == 0) return cumulative_cubic(b.phi, g, 0, 0);
  std::vector<double> out(n, 0.0);
  for (int i = 1; i <= f; ++i) out[i] = out[i - 1] + 0.5 * (g[i - 1] + g[i]) * (b.phi[i] - b.phi[i - 1]);
  const std::vector<double> tail = cumulative_cubic(b.phi, g, f, f);
  for (int i = f + 1; i < n; ++i) out[i] = out[f] + tail[i];
  return out;
}

void fill_gradient(FieldBlock& b, const GasModel& gas) {
  const int n0 = static_cast<int>(b.phi.size()), n1 = static_cast<int>(b.psi.size());
  Field2D Bq(n0, n1), Aq(n0, n1);
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      const double u = b.q(i, j) - gas.c_star();
      Bq(i, j) = gas.B_offset(u);
      Aq(i, j) = gas.A_offset(u);
    }
  }
  b.theta_phi = Field2D(n0, n1);
  b.theta_psi = Field2D(n0, n1);
  for (int i = 0; i < n0; ++i) {
    const std::vector<double> s = psi_slope_even(b.psi, column(Bq, i));
    for (int j = 0; j < n1; ++j) b.theta_phi(i, j) = s[j];
  }
  const int lo = b.first_fine_row;
  std::vector<double> x(b.phi.begin() + lo, b.phi.end());
  for (int j = 0; j < n1; ++j) {
    std::vector<double> a = row(Aq, j);
    std::vector<double> ax(a.begin() + lo, a.end());
    for (int i = lo; i < n0; ++i) b.theta_psi(i, j) = -lagrange_slope(x, ax, b.phi[i]);
    for (int i = 0; i < lo; ++i) b.theta_psi(i, j) = 0.0;
  }
}

// Returns the curl residual of the block.
double theta_block(FieldBlock& b, const GasModel& gas, bool sub_side) {
  if (b.phi.empty()) return 0.0;
  if (b.theta_phi.empty() || b.theta_psi.empty()) fill_gradient(b, gas);
  const int n0 = static_cast<int>(b.phi.size()), n1 = static_cast<int>(b.psi.size());
  b.theta = Field2D(n0, n1);
  for (int j = 0; j < n1; ++j) {
    const std::vector<double> t = integrate_from_sonic(b, row(b.theta_phi, j), sub_side);
    for (int i = 0; i < n0; ++i) b.theta(i, j) = t[i];
  }
  double curl = 0.0;
  const int lo = sub_side ? 0 : b.first_fine_row;
  for (int i = lo; i < n0; ++i) {
    const std::vector<double> t = cumulative_cubic(b.psi, column(b.theta_psi, i), 0, 0);
    for (int j = 0; j < n1; ++j) curl = std::max(curl, std::abs(t[j] - b.theta(i, j)));
  }
  return curl;
}

void physical_block(FieldBlock& b, const GasModel& gas, double q_floor, bool sub_side) {
  if (b.phi.empty()) return;
  const int n0 = static_cast<int>(b.phi.size()), n1 = static_cast<int>(b.psi.size());
  const double cs = gas.c_star();
  const double rho_s = gas.density(cs * cs);
  b.x = Field2D(n0, n1);
  b.y = Field2D(n0, n1);
  std::vector<double> gx(n0), gy(n0);
  for (int j = 0; j < n1; ++j) {
    for (int i = 0; i < n0; ++i) {
      const double q = b.q(i, j);
      if (!(q > q_floor)) {
        std::ostringstream msg;
        msg << "to_physical: speed " << q << " below floor at (" << b.phi[i] << ", " << b.psi[j] << ")";
        throw DomainError(msg.str());
      }
      gx[i] = std::cos(b.theta(i, j)) / q;
      gy[i] = std::sin(b.theta(i, j)) / q;
    }
    const std::vector<double> x = integrate_from_sonic(b, gx, sub_side);
    const std::vector<double> y = integrate_from_sonic(b, gy, sub_side);
    const double y0 = b.psi[j] / (rho_s * cs);
    for (int i = 0; i < n0; ++i) {
      b.x(i, j) = x[i];
      b.y(i, j) = y0 + y[i];
    }
  }
}

// Linear interpolation along a row that is increasing in `key`.
bool row_at(const std::vector<double>& key, double k, int& cell, double& t) {
  const int n = static_cast<int>(key.size());
  if (k < key.front() || k > key.back()) return false;
  cell = std::clamp(locate(key, k), 0, n - 2);
  t = (k - key[cell]) / (key[cell + 1] - key[cell]);
  return true;
}

}  // namespace

TransonicSolution connect(const SubsonicField* sub, const SupersonicField* sup,
                          const GasModel& gas, double mass_tol) {
  if (!sub && !sup) throw std::invalid_argument("connect: need at least one side");
  const double cs = gas.c_star();
  TransonicSolution sol;
  if (sub) {
    sol.sub.phi = sub->phi;
    sol.sub.psi = sub->psi;
    sol.sub.q = sub->q;
    sol.m = sub->m_in;
    sol.zeta_minus = sub->phi.front();
  }
  if (sup) {
    FieldBlock& b = sol.sup;
    b.phi = sup->phi;
    b.psi = sup->psi;
    const int n0 = static_cast<int>(b.phi.size()), n1 = static_cast<int>(b.psi.size());
    b.q = Field2D(n0, n1);
    b.theta_phi = Field2D(n0, n1);
    b.theta_psi = Field2D(n0, n1);
    int cut = 0;
    while (cut < n0 && b.phi[cut] < sup->eps_cut) ++cut;
    b.first_fine_row = cut;
    for (int i = 0; i < n0; ++i) {
      for (int j = 0; j < n1; ++j) {
        const double Q = sup->Q(i, j);
        if (Q < 0.0) {
          const SupersonicState st = gas.supersonic_state(Q);
          b.q(i, j) = st.q;
          if (i >= cut) b.theta_phi(i, j) = 0.5 * st.sqrt_b * (sup->W(i, j) + sup->Z(i, j));
        } else {
          b.q(i, j) = cs;
        }
        if (i >= cut) b.theta_psi(i, j) = -0.5 * (sup->W(i, j) - sup->Z(i, j));
      }
    }
    sol.zeta_plus = sup->zeta_plus;
    if (!sub) sol.m = sup->m;
  }
  if (sub && sup) {
    const double mismatch = std::abs(sub->m_in - sup->m) / sup->m;
    sol.matching.mass_mismatch = mismatch;
    if (mismatch > mass_tol) {
      std::ostringstream msg;
      msg << "connect: mass flux mismatch " << mismatch << " exceeds " << mass_tol;
      throw DomainError(msg.str());
    }
  }

  // One-sided slopes on each side of phi = 0, as secants over the two nearest
  // cells: on fine grids the first subsonic node sits within the solver's
  // sonic excursion and is clipped to c*, so a first-cell slope reads zero.
  MatchingReport& r = sol.matching;
  std::vector<double> minus_slope, plus_slope;
  if (sub) {
    const int N = static_cast<int>(sol.sub.phi.size()) - 1;
    const double h = sol.sub.phi[N] - sol.sub.phi[N - 2];
    for (size_t j = 0; j < sol.sub.psi.size(); ++j) {
      const int jj = static_cast<int>(j);
      minus_slope.push_back((sol.sub.q(N, jj) - sol.sub.q(N - 2, jj)) / h);
      r.qphi_minus = std::max(r.qphi_minus, std::abs(minus_slope.back()));
    }
  }
  if (sup) {
    const double h = sol.sup.phi[2] - sol.sup.phi[0];
    for (size_t j = 0; j < sol.sup.psi.size(); ++j) {
      const int jj = static_cast<int>(j);
      plus_slope.push_back((sol.sup.q(2, jj) - sol.sup.q(0, jj)) / h);
      r.qphi_plus = std::max(r.qphi_plus, std::abs(plus_slope.back()));
    }
  }
  if (sub && sup) {
    const double scale = sol.sup.psi.back() / sol.sub.psi.back();
    for (size_t j = 0; j < sol.sub.psi.size(); ++j) {
      const double p = lagrange_interp(sol.sup.psi, plus_slope, sol.sub.psi[j] * scale);
      r.qphi_gap = std::max(r.qphi_gap, std::abs(minus_slope[j] - p));
    }
  } else {
    r.qphi_gap = std::max(r.qphi_minus, r.qphi_plus);
  }
  // q_psi on the sonic column, extrapolated linearly from the two nearest
  // columns of the side that resolves the approach more finely.
  auto qpsi_column = [](const FieldBlock& b, int i) {
    return psi_slope_even(b.psi, column(b.q, i));
  };
  const bool use_sub = sub && (!sup || (sol.sub.phi.back() - sol.sub.phi[sol.sub.phi.size() - 2]) <=
                                           sol.sup.phi[1]);
  const FieldBlock& b = use_sub ? sol.sub : sol.sup;
  const int n = static_cast<int>(b.phi.size());
  const int i1 = use_sub ? n - 2 : 1, i2 = use_sub ? n - 3 : 2;
  const int i0 = use_sub ? n - 1 : 0;
  if (n >= 3) {
    const std::vector<double> s1 = qpsi_column(b, i1), s2 = qpsi_column(b, i2);
    for (size_t j = 0; j < s1.size(); ++j) {
      const double est = s1[j] + (b.phi[i0] - b.phi[i1]) * (s1[j] - s2[j]) / (b.phi[i1] - b.phi[i2]);
      r.qpsi_sonic = std::max(r.qpsi_sonic, std::abs(est));
    }
  }
  return sol;
}

void reconstruct_theta(TransonicSolution& sol, const GasModel& gas, double curl_threshold) {
  const double c1 = theta_block(sol.sub, gas, true);
  const double c2 = theta_block(sol.sup, gas, false);
  sol.curl_residual = std::max(c1, c2);
  sol.has_theta = true;
  if (sol.curl_residual > curl_threshold) {
    std::ostringstream msg;
    msg << "reconstruct_theta: curl residual " << sol.curl_residual << " exceeds "
        << curl_threshold;
    throw ConvergenceError(msg.str(), {});
  }
}

void to_physical(TransonicSolution& sol, const GasModel& gas, double q_floor) {
  if (!sol.has_theta) reconstruct_theta(sol, gas);
  physical_block(sol.sub, gas, q_floor, true);
  physical_block(sol.sup, gas, q_floor, false);
  sol.has_xy = true;
}

ClosureReport physical_closure(const TransonicSolution& sol, const NozzleSpec& spec,
                               const GasModel& gas, int stations) {
  if (!sol.has_xy) throw std::invalid_argument("physical_closure: run to_physical first");
  ClosureReport rep;
  auto wall_check = [&](const FieldBlock& b, double lo, double hi) {
    if (b.phi.empty()) return;
    const int M = static_cast<int>(b.psi.size()) - 1;
    for (size_t i = 0; i < b.phi.size(); ++i) {
      const double x = b.x(static_cast<int>(i), M);
      if (x < lo || x > hi) continue;
      const int ii = static_cast<int>(i);
      rep.wall_error = std::max(rep.wall_error, std::abs(b.y(ii, M) - spec.wall.f(x)) / spec.f0);
      rep.wall_angle_error =
          std::max(rep.wall_angle_error, std::abs(b.theta(ii, M) - spec.wall_angle(x)));
    }
  };
  wall_check(sol.sub, spec.l_minus, 0.0);
  wall_check(sol.sup, 0.0, spec.l_plus);

  // Common x-range of all rows, then equally spaced interior stations.
  double x_lo = -1e300, x_hi = 1e300;
  const FieldBlock& left = sol.sub.phi.empty() ? sol.sup : sol.sub;
  const FieldBlock& right = sol.sup.phi.empty() ? sol.sub : sol.sup;
  for (size_t j = 0; j < left.psi.size(); ++j) x_lo = std::max(x_lo, left.x(0, static_cast<int>(j)));
  for (size_t j = 0; j < right.psi.size(); ++j) {
    x_hi = std::min(x_hi, right.x(static_cast<int>(right.phi.size()) - 1, static_cast<int>(j)));
  }
  double fmin = 1e300, fmax = -1e300;
  for (int k = 0; k < stations; ++k) {
    const double xs = x_lo + (k + 1) * (x_hi - x_lo) / (stations + 1);
    const FieldBlock& b = (xs <= 0.0 && !sol.sub.phi.empty()) || sol.sup.phi.empty() ? sol.sub : sol.sup;
    std::vector<double> ys, fl;
    for (size_t j = 0; j < b.psi.size(); ++j) {
      const int jj = static_cast<int>(j);
      const std::vector<double> xr = row(b.x, jj);
      int cell;
      double t;
      if (!row_at(xr, xs, cell, t)) continue;
      auto at = [&](const Field2D& f) { return (1.0 - t) * f(cell, jj) + t * f(cell + 1, jj); };
      const double q = at(b.q);
      const double th = at(b.theta);
      ys.push_back(at(b.y));
      fl.push_back(gas.density(q * q) * q * std::cos(th));
    }
    double flux = 0.0;
    for (size_t j = 1; j < ys.size(); ++j) flux += 0.5 * (fl[j] + fl[j - 1]) * (ys[j] - ys[j - 1]);
    rep.station_x.push_back(xs);
    rep.station_flux.push_back(flux);
    fmin = std::min(fmin, flux);
    fmax = std::max(fmax, flux);
  }
  if (!rep.station_flux.empty()) rep.flux_drift = (fmax - fmin) / sol.m;
  return rep;
}

PotentialField combined_field(const TransonicSolution& sol) {
  PotentialField f;
  const bool has_sub = !sol.sub.phi.empty(), has_sup = !sol.sup.phi.empty();
  f.psi = has_sub ? sol.sub.psi : sol.sup.psi;
  if (has_sub) f.phi = sol.sub.phi;
  const int n_sub = has_sub ? static_cast<int>(sol.sub.phi.size()) : 0;
  const int skip = has_sub ? 1 : 0;
  if (has_sup) f.phi.insert(f.phi.end(), sol.sup.phi.begin() + skip, sol.sup.phi.end());
  const int n0 = static_cast<int>(f.phi.size()), n1 = static_cast<int>(f.psi.size());
  f.q = Field2D(n0, n1);
  const bool theta = sol.has_theta;
  if (theta) f.theta = Field2D(n0, n1);
  for (int i = 0; i < n_sub; ++i) {
    for (int j = 0; j < n1; ++j) {
      f.q(i, j) = sol.sub.q(i, j);
      if (theta) f.theta(i, j) = sol.sub.theta(i, j);
    }
  }
  if (has_sup) {
    const double scale = sol.sup.psi.back() / f.psi.back();
    // Resample offsets from the sonic value so uniformly sonic columns stay exact.
    const double sonic = sol.sup.q(0, 0);
    for (int i = skip; i < static_cast<int>(sol.sup.phi.size()); ++i) {
      std::vector<double> qc = column(sol.sup.q, i);
      for (double& v : qc) v -= sonic;
      const std::vector<double> tc = theta ? column(sol.sup.theta, i) : std::vector<double>{};
      for (int j = 0; j < n1; ++j) {
        const double p = f.psi[j] * scale;
        f.q(n_sub + i - skip, j) = sonic + (has_sub ? lagrange_interp(sol.sup.psi, qc, p) : qc[j]);
        if (theta) f.theta(n_sub + i - skip, j) = has_sub ? lagrange_interp(sol.sup.psi, tc, p) : tc[j];
      }
    }
  }
  return f;
}

}  // namespace laval
