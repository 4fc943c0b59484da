#include "laval/supersonic.h"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "laval/errors.h"
#include "laval/interpolation.h"

namespace laval {
namespace {

// Weights of the cubic through nodes -1, 0, 1, 2 at offset s in [0, 1].
std::array<double, 4> cubic_weights(double s) {
  return {-s * (s - 1.0) * (s - 2.0) / 6.0, (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
          -(s + 1.0) * s * (s - 2.0) / 2.0, (s + 1.0) * s * (s - 1.0) / 6.0};
}

// Evaluates a node row on the uniform psi grid at y. `ghost(k)` supplies the
// value at node -k for k = 1 (reflection across psi = 0). The last cell uses
// the quadratic through its three top nodes.
template <class Row, class Ghost>
double row_interp(const Row& row, Ghost&& ghost, int M, double d, double y) {
  const double r = y / d;
  int k = static_cast<int>(std::floor(r));
  k = std::clamp(k, 0, M - 1);
  const double s = r - k;
  if (M >= 2 && k == M - 1) {
    const double v0 = row[M - 2], v1 = row[M - 1], v2 = row[M];
    return s * (s - 1.0) / 2.0 * v0 - (s + 1.0) * (s - 1.0) * v1 + (s + 1.0) * s / 2.0 * v2;
  }
  if (M < 2) return (1.0 - s) * row[k] + s * row[k + 1];
  const auto w = cubic_weights(s);
  const double vm = k == 0 ? ghost(1) : row[k - 1];
  return w[0] * vm + w[1] * row[k] + w[2] * row[k + 1] + w[3] * row[k + 2];
}

template <class F>
double gauss3(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 3>::integrate(f, a, b);
}

}  // namespace

double effective_phi_ratio(const SupersonicOptions& opt) {
  return opt.phi_ratio > 0.0 ? opt.phi_ratio : 1.0 + 0.8 / opt.n_psi;
}

std::vector<double> supersonic_phi_nodes(double zeta, double phi_ratio, double eps_fraction) {
  if (!(zeta > 0.0)) throw std::invalid_argument("supersonic grid: zeta must be positive");
  if (!(phi_ratio > 1.0)) throw std::invalid_argument("supersonic grid: phi_ratio must exceed 1");
  if (!(eps_fraction > 0.0 && eps_fraction < 1.0)) {
    throw std::invalid_argument("supersonic grid: eps_fraction must lie in (0, 1)");
  }
  const int K = std::max(3, static_cast<int>(std::lround(std::log(1.0 / eps_fraction) /
                                                          std::log(phi_ratio))));
  std::vector<double> phi(K + 2);
  phi[0] = 0.0;
  for (int k = K; k >= 0; --k) phi[K + 1 - k] = zeta * std::pow(phi_ratio, -k);
  phi.back() = zeta;
  return phi;
}

Candidate make_candidate(std::vector<double> phi, std::vector<double> psi, Field2D Q) {
  const int n0 = static_cast<int>(phi.size()), n1 = static_cast<int>(psi.size());
  if (Q.n0() != n0 || Q.n1() != n1) throw std::invalid_argument("make_candidate: shape mismatch");
  if (n0 < 5 || n1 < 3) throw std::invalid_argument("make_candidate: grid too small");
  Candidate c;
  c.Q_phi = Field2D(n0, n1);
  c.Q_psi = Field2D(n0, n1);
  // phi-derivative from the rows at and above the cut only
  std::vector<double> x(phi.begin() + 1, phi.end()), col(n0 - 1);
  for (int j = 0; j < n1; ++j) {
    for (int i = 1; i < n0; ++i) col[i - 1] = Q(i, j);
    for (int i = 1; i < n0; ++i) c.Q_phi(i, j) = lagrange_slope(x, col, phi[i]);
  }
  // psi-derivative with the even extension Q(-psi) = Q(psi)
  std::vector<double> y(n1 + 2), row(n1 + 2);
  y[0] = -psi[2];
  y[1] = -psi[1];
  for (int j = 0; j < n1; ++j) y[j + 2] = psi[j];
  for (int i = 0; i < n0; ++i) {
    row[0] = Q(i, 2);
    row[1] = Q(i, 1);
    for (int j = 0; j < n1; ++j) row[j + 2] = Q(i, j);
    c.Q_psi(i, 0) = 0.0;
    for (int j = 1; j < n1; ++j) c.Q_psi(i, j) = lagrange_slope(y, row, psi[j]);
  }
  c.phi = std::move(phi);
  c.psi = std::move(psi);
  c.Q = std::move(Q);
  return c;
}

std::vector<double> wall_source(const NozzleSpec& spec, const BoundaryMaps& maps,
                                const GasModel& gas, const std::vector<double>& phi,
                                const std::vector<double>& Q_wall) {
  if (phi.size() != Q_wall.size()) throw std::invalid_argument("wall_source: size mismatch");
  if (!maps.has_downstream()) throw std::invalid_argument("wall_source: maps lack the downstream wall");
  std::vector<double> h(phi.size(), 0.0);
  for (size_t i = 0; i < phi.size(); ++i) {
    if (phi[i] <= 0.0) continue;
    const double x = std::clamp(maps.X_plus(std::min(phi[i], maps.zeta_plus)), 0.0, spec.l_plus);
    const double rate = spec.wall_angle_rate(x);
    const double cosine = std::cos(spec.wall_angle(x));
    if (Q_wall[i] == 0.0 && rate == 0.0) continue;
    if (!(Q_wall[i] < 0.0)) {
      std::ostringstream msg;
      msg << "wall_source: candidate wall value " << Q_wall[i] << " is not supersonic at phi = "
          << phi[i];
      throw DomainError(msg.str());
    }
    const SupersonicState st = gas.supersonic_state(Q_wall[i]);
    h[i] = 2.0 * rate * cosine / (st.sqrt_b * st.q);
    if (h[i] < 0.0) {
      std::ostringstream msg;
      msg << "wall_source: negative source " << h[i] << " at phi = " << phi[i];
      throw DomainError(msg.str());
    }
  }
  return h;
}

LinearSolution solve_linear(const Candidate& cand, const GasModel& gas,
                            const std::vector<double>& h, int cut_row,
                            double weight_exponent, const SupersonicOptions& opt,
                            const LinearSolution* start) {
  const int n0 = static_cast<int>(cand.phi.size());
  const int M = static_cast<int>(cand.psi.size()) - 1;
  if (static_cast<int>(h.size()) != n0) throw std::invalid_argument("solve_linear: h size mismatch");
  if (cut_row < 1 || cut_row + 2 >= n0) throw std::invalid_argument("solve_linear: bad cut row");
  if (M < 1) throw std::invalid_argument("solve_linear: need psi cells");
  const double d = cand.psi[M] / M;
  const std::vector<double>& phi = cand.phi;

  // Frozen coefficients at the nodes: log speed and phi * source rate, both
  // close to linear in log phi near the cut.
  Field2D log_c(n0, M + 1), phi_aw(n0, M + 1), phi_az(n0, M + 1);
  std::vector<double> c_max(n0, 0.0);
  for (int i = cut_row; i < n0; ++i) {
    for (int j = 0; j <= M; ++j) {
      const double q = cand.Q(i, j);
      if (!(q < 0.0)) {
        std::ostringstream msg;
        msg << "solve_linear: candidate is not supersonic at (" << phi[i] << ", " << cand.psi[j]
            << ")";
        throw DomainError(msg.str());
      }
      const SupersonicState st = gas.supersonic_state(q);
      log_c(i, j) = std::log(st.sqrt_b);
      c_max[i] = std::max(c_max[i], st.sqrt_b);
      if (opt.sources) {
        const double wt = cand.Q_phi(i, j) - st.sqrt_b * cand.Q_psi(i, j);
        const double zt = -cand.Q_phi(i, j) - st.sqrt_b * cand.Q_psi(i, j);
        phi_aw(i, j) = phi[i] * 0.25 * st.p / st.b * wt;
        phi_az(i, j) = -phi[i] * 0.25 * st.p / st.b * zt;
      }
    }
  }
  std::vector<double> phi_up(phi.begin() + cut_row, phi.end());
  std::vector<double> h_up(h.begin() + cut_row, h.end());

  LinearSolution out;
  Field2D w(n0, M + 1), z(n0, M + 1);
  if (start && start->W.n0() == n0 && start->W.n1() == M + 1) {
    w = start->W;
    z = start->Z;
  }
  Field2D W(n0, M + 1), Z(n0, M + 1);
  std::vector<double> Wc(M + 1), Zc(M + 1), Wn(M + 1), Zn(M + 1);
  std::vector<double> cm(M + 1), awm(M + 1), azm(M + 1), wm(M + 1), zm(M + 1);

  auto weight = [&](int i) { return std::pow(phi[i], -weight_exponent); };
  int stall = 0;
  double prev_change = 0.0;
  for (int it = 1; it <= opt.max_contraction; ++it) {
    std::fill(Wc.begin(), Wc.end(), 0.0);
    std::fill(Zc.begin(), Zc.end(), 0.0);
    for (int j = 0; j <= M; ++j) W(cut_row, j) = Z(cut_row, j) = 0.0;
    for (int i = cut_row; i + 1 < n0; ++i) {
      const double hi = phi[i + 1] - phi[i];
      const double cfl_len = opt.cfl * d;
      const int n_sub = std::max(1, static_cast<int>(std::ceil(hi * std::max(c_max[i], c_max[i + 1]) / cfl_len)));
      if (n_sub > 1000000) throw ConvergenceError("solve_linear: CFL step collapse", out.history);
      const double tau = hi / n_sub;
      const double log_ratio = std::log(phi[i + 1] / phi[i]);
      for (int s = 0; s < n_sub; ++s) {
        const double pa = phi[i] + s * tau;
        const double pm = pa + 0.5 * tau;
        const double pb = s + 1 == n_sub ? phi[i + 1] : pa + tau;
        const double tl = std::log(pm / phi[i]) / log_ratio;  // log-phi weight
        const double tp = (pm - phi[i]) / hi;                 // phi weight
        for (int j = 0; j <= M; ++j) {
          cm[j] = std::exp((1.0 - tl) * log_c(i, j) + tl * log_c(i + 1, j));
          awm[j] = ((1.0 - tl) * phi_aw(i, j) + tl * phi_aw(i + 1, j)) / pm;
          azm[j] = ((1.0 - tl) * phi_az(i, j) + tl * phi_az(i + 1, j)) / pm;
          wm[j] = (1.0 - tp) * w(i, j) + tp * w(i + 1, j);
          zm[j] = (1.0 - tp) * z(i, j) + tp * z(i + 1, j);
        }
        auto even = [](const std::vector<double>& r) { return [&r](int k) { return r[k]; }; };
        auto ghost_of = [](const std::vector<double>& partner) {
          return [&partner](int k) { return -partner[k]; };
        };
        const double h_b = lagrange_interp(phi_up, h_up, pb);
        for (int j = 1; j <= M; ++j) {
          // plus family: foot below the node
          const double y = cand.psi[j];
          const double c0 = cm[j];
          const double y_mid = std::max(0.0, y - 0.5 * tau * c0);
          const double c1 = row_interp(cm, even(cm), M, d, y_mid);
          const double y_foot = y - tau * c1;
          const double y_m = 0.5 * (y + y_foot);
          const double a = row_interp(awm, even(awm), M, d, y_m);
          const double zp = row_interp(zm, ghost_of(wm), M, d, y_m);
          const double foot = row_interp(Wc, ghost_of(Zc), M, d, y_foot);
          const double e = std::expm1(a * tau);
          Wn[j] = foot + e * (foot + zp);
        }
        for (int j = 0; j < M; ++j) {
          // minus family: foot above the node
          const double y = cand.psi[j];
          const double c0 = cm[j];
          const double y_mid = std::min(cand.psi[M], y + 0.5 * tau * c0);
          const double c1 = row_interp(cm, even(cm), M, d, y_mid);
          const double y_foot = y + tau * c1;
          const double y_m = 0.5 * (y + y_foot);
          const double a = row_interp(azm, even(azm), M, d, y_m);
          const double wp = row_interp(wm, ghost_of(zm), M, d, y_m);
          const double foot = row_interp(Zc, ghost_of(Wc), M, d, y_foot);
          const double e = std::expm1(a * tau);
          Zn[j] = foot + e * (foot + wp);
        }
        Wn[0] = -Zn[0];
        Zn[M] = h_b - Wn[M];
        Wc.swap(Wn);
        Zc.swap(Zn);
      }
      for (int j = 0; j <= M; ++j) {
        W(i + 1, j) = Wc[j];
        Z(i + 1, j) = Zc[j];
      }
    }

    double change = 0.0, norm = 0.0;
    for (int i = cut_row + 1; i < n0; ++i) {
      const double wgt = weight(i);
      for (int j = 0; j <= M; ++j) {
        change = std::max(change, wgt * std::max(std::abs(W(i, j) - w(i, j)), std::abs(Z(i, j) - z(i, j))));
        norm = std::max(norm, wgt * std::max(std::abs(W(i, j)), std::abs(Z(i, j))));
      }
    }
    out.history.push_back(change);
    if (it > 1) {
      const double ratio = prev_change > 0.0 ? change / prev_change : 0.0;
      out.ratios.push_back(ratio);
      stall = ratio >= 1.0 ? stall + 1 : 0;
    }
    prev_change = change;
    w = W;
    z = Z;
    out.iterations = it;
    if (change <= opt.tol_contraction * norm || change == 0.0) {
      out.W = std::move(W);
      out.Z = std::move(Z);
      return out;
    }
    if (stall >= 5 || !std::isfinite(change)) {
      throw ConvergenceError("solve_linear: contraction stalled (zeta_plus likely too large)",
                             out.history);
    }
  }
  throw ConvergenceError("solve_linear: contraction did not converge", out.history);
}

Field2D integrate_Q(const std::vector<double>& phi, const Field2D& W, const Field2D& Z,
                    int cut_row, const std::vector<double>& Q_eps, double exponent) {
  const int n0 = static_cast<int>(phi.size());
  const int n1 = W.n1();
  if (W.n0() != n0 || Z.n0() != n0 || Z.n1() != n1 || static_cast<int>(Q_eps.size()) != n1) {
    throw std::invalid_argument("integrate_Q: shape mismatch");
  }
  if (cut_row < 1 || cut_row + 3 >= n0) throw std::invalid_argument("integrate_Q: bad cut row");
  Field2D Q(n0, n1);
  const double eps = phi[cut_row];
  double g_scale = 0.0;
  for (int i = cut_row; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) g_scale = std::max(g_scale, std::abs(W(i, j) - Z(i, j)));
  }
  std::vector<double> g(n0);
  for (int j = 0; j < n1; ++j) {
    for (int i = 0; i < n0; ++i) g[i] = 0.5 * (W(i, j) - Z(i, j));
    for (int i = cut_row + 1; i < n0; ++i) {
      if (g[i] > 1e-12 * g_scale) {
        std::ostringstream msg;
        msg << "integrate_Q: Q_phi = " << g[i] << " > 0 at phi = " << phi[i];
        throw DomainError(msg.str());
      }
    }
    for (int i = 1; i < cut_row; ++i) Q(i, j) = Q_eps[j] * std::pow(phi[i] / eps, exponent);
    Q(0, j) = 0.0;
    Q(cut_row, j) = Q_eps[j];
    // Piecewise cubic through four neighbouring rows at or above the cut.
    for (int i = cut_row; i + 1 < n0; ++i) {
      const int s = std::clamp(i - 1, cut_row, n0 - 4);
      auto f = [&](double x) { return lagrange(&phi[s], &g[s], 4, x); };
      Q(i + 1, j) = Q(i, j) + gauss3(f, phi[i], phi[i + 1]);
    }
  }
  return Q;
}

namespace {

// Value of the wall row at phi, with the power-law extension below the cut.
double wall_value(const std::vector<double>& phi, const Field2D& Q, int cut_row, double exponent,
                  double x) {
  const int j = Q.n1() - 1;
  const double eps = phi[cut_row];
  if (x <= 0.0) return 0.0;
  if (x < eps) return Q(cut_row, j) * std::pow(x / eps, exponent);
  std::vector<double> xs(phi.begin() + cut_row, phi.end()), ys(xs.size());
  for (size_t k = 0; k < xs.size(); ++k) ys[k] = Q(cut_row + static_cast<int>(k), j);
  return std::min(0.0, lagrange_interp(xs, ys, x));
}

}  // namespace

SupersonicField supersonic_fixed_point(const NozzleSpec& spec, const GasModel& gas,
                                       const SupersonicOptions& opt) {
  const double cs = gas.c_star();
  if (!(opt.seed_scale > 0.0)) throw std::invalid_argument("supersonic seed_scale must be positive");
  const double m = mass_flux(spec, gas);
  const double exponent = spec.lambda_plus + 2.0;
  const int cut_row = 1;
  const std::vector<double> psi = uniform_nodes(0.0, m, opt.n_psi);
  const int M = opt.n_psi;

  std::vector<double> s_nodes = supersonic_phi_nodes(1.0, effective_phi_ratio(opt), opt.eps_fraction);
  const int n0 = static_cast<int>(s_nodes.size());
  const int n_wall = opt.wall_samples > 0 ? opt.wall_samples : 2 * n0;
  SpeedSamples q_plus;
  q_plus.s = graded_nodes(0.0, spec.l_plus, n_wall, 1.05, 100.0, ClusterEnd::lower);
  q_plus.q.assign(q_plus.s.size(), cs);

  bool flat = true;
  for (double x : q_plus.s) flat = flat && spec.wall_angle_rate(x) == 0.0;

  auto make_phi = [&](double zeta) {
    std::vector<double> phi(s_nodes);
    for (double& v : phi) v *= zeta;
    phi.back() = zeta;
    return phi;
  };

  BoundaryMaps maps = build_maps(spec, gas, {}, {}, q_plus);
  std::vector<double> phi = make_phi(maps.zeta_plus);

  SupersonicField out;
  out.psi = psi;
  out.m = m;
  out.exponent = exponent;
  if (flat) {
    // Flat walls carry no turning: the identically sonic state is the solution.
    out.phi = phi;
    out.Q = Field2D(n0, M + 1);
    out.W = Field2D(n0, M + 1);
    out.Z = Field2D(n0, M + 1);
    out.h.assign(n0, 0.0);
    out.zeta_plus = maps.zeta_plus;
    out.eps_cut = phi[cut_row];
    out.outer_iterations = 1;
    out.outer_history = {0.0};
    out.maps = std::move(maps);
    return out;
  }

  // Seed: the psi-average problem, (d/dphi)^2 int Q dpsi = -Theta' cos Theta / q,
  // solved with the sonic wall speed and spread uniformly in psi.
  Field2D Qt(n0, M + 1);
  {
    auto g = [&](double t) {
      const double x = std::clamp(maps.X_plus(t), 0.0, spec.l_plus);
      return spec.wall_angle_rate(x) * std::cos(spec.wall_angle(x)) / cs;
    };
    double F1 = 0.0, F1t = 0.0;  // int g, int t g
    for (int i = 1; i < n0; ++i) {
      F1 += boost::math::quadrature::gauss<double, 10>::integrate(g, phi[i - 1], phi[i]);
      F1t += boost::math::quadrature::gauss<double, 10>::integrate(
          [&](double t) { return t * g(t); }, phi[i - 1], phi[i]);
      const double F2 = phi[i] * F1 - F1t;
      for (int j = 0; j <= M; ++j) Qt(i, j) = -opt.seed_scale * F2 / m;
    }
    for (int i = 1; i < n0; ++i) {
      if (!(Qt(i, 0) < 0.0)) {
        // Walls flat near the throat leave the seed sonic there; borrow the
        // power law from the first negative row.
        int k = i;
        while (k < n0 && !(Qt(k, 0) < 0.0)) ++k;
        if (k >= n0) throw DomainError("supersonic seed: wall turning vanishes");
        for (int r = i; r < k; ++r) {
          for (int j = 0; j <= M; ++j) Qt(r, j) = Qt(k, j) * std::pow(phi[r] / phi[k], exponent);
        }
        break;
      }
    }
  }
  // Row used to extrapolate the cut value along the power law.
  int anchor = cut_row;
  while (anchor + 1 < n0 && phi[anchor] < 2.0 * phi[cut_row]) ++anchor;

  std::vector<double> history;
  LinearSolution lin;
  bool have_lin = false;
  for (int it = 1; it <= opt.max_outer; ++it) {
    const Candidate cand = make_candidate(phi, psi, Qt);
    std::vector<double> Q_wall(n0);
    for (int i = 0; i < n0; ++i) Q_wall[i] = Qt(i, M);
    const std::vector<double> h = wall_source(spec, maps, gas, phi, Q_wall);
    lin = solve_linear(cand, gas, h, cut_row, spec.lambda_plus + 1.0, opt, have_lin ? &lin : nullptr);
    have_lin = true;
    std::vector<double> Q_eps(M + 1);
    for (int j = 0; j <= M; ++j) {
      Q_eps[j] = Qt(anchor, j) * std::pow(phi[cut_row] / phi[anchor], exponent);
    }
    Field2D Q = integrate_Q(phi, lin.W, lin.Z, cut_row, Q_eps, exponent);

    double change = 0.0;
    std::vector<double> q_new(q_plus.s.size());
    for (size_t k = 0; k < q_plus.s.size(); ++k) {
      const double x = q_plus.s[k];
      const double ph = std::clamp(maps.Phi_plus(x), 0.0, maps.zeta_plus);
      const double v = k == 0 ? 0.0 : wall_value(phi, Q, cut_row, exponent, ph);
      q_new[k] = v < 0.0 ? cs + gas.A_inv_offset(v, Branch::supersonic) : cs;
      change = std::max(change, std::abs(q_new[k] - q_plus.q[k]));
    }
    history.push_back(change);
    if (opt.observer) {
      SupersonicField snap;
      snap.phi = phi;
      snap.psi = psi;
      snap.Q = Q;
      snap.W = lin.W;
      snap.Z = lin.Z;
      snap.h = h;
      snap.zeta_plus = maps.zeta_plus;
      snap.m = m;
      snap.eps_cut = phi[cut_row];
      snap.exponent = exponent;
      snap.inner_iterations = lin.iterations;
      snap.outer_iterations = it;
      snap.outer_history = history;
      opt.observer(it, snap);
    }
    if (change <= opt.tol_outer) {
      out.phi = phi;
      out.Q = std::move(Q);
      out.W = lin.W;
      out.Z = lin.Z;
      out.h = h;
      out.zeta_plus = maps.zeta_plus;
      out.eps_cut = phi[cut_row];
      out.inner_iterations = lin.iterations;
      out.contraction_history = lin.history;
      out.outer_iterations = it;
      out.outer_history = history;
      out.maps = std::move(maps);
      return out;
    }
    if (!std::isfinite(change)) break;
    for (size_t k = 0; k < q_plus.q.size(); ++k) {
      q_plus.q[k] += opt.damping * (q_new[k] - q_plus.q[k]);
    }
    // Damped candidate update, carried by index so the field keeps its shape
    // on the rescaled interval [0, zeta_plus].
    for (int i = 0; i < n0; ++i) {
      for (int j = 0; j <= M; ++j) Qt(i, j) += opt.damping * (Q(i, j) - Qt(i, j));
    }
    maps = build_maps(spec, gas, {}, {}, q_plus);
    phi = make_phi(maps.zeta_plus);
  }
  throw ConvergenceError("supersonic outer iteration did not converge", history);
}

CharacteristicPath trace_characteristic(const SupersonicField& field, const GasModel& gas,
                                        double phi0, double psi0, Family family,
                                        const TraceOptions& opt) {
  const double eps = field.eps_cut;
  const double m = field.psi.back();
  if (!(phi0 > eps) || phi0 > field.phi.back() * (1.0 + 1e-12) || psi0 < 0.0 || psi0 > m) {
    throw std::invalid_argument("trace_characteristic: start outside (eps_cut, zeta] x [0, m]");
  }
  int cut = 0;
  while (cut < static_cast<int>(field.phi.size()) && field.phi[cut] < eps) ++cut;
  const std::vector<double> px(field.phi.begin() + cut, field.phi.end());
  Field2D Qs(static_cast<int>(px.size()), field.Q.n1());
  for (int i = 0; i < Qs.n0(); ++i) {
    for (int j = 0; j < Qs.n1(); ++j) Qs(i, j) = field.Q(cut + i, j);
  }
  const GridInterpolator Qi(px, field.psi, Qs);
  double sign = family == Family::plus ? 1.0 : -1.0;

  using State = std::array<double, 1>;
  auto rhs = [&](const State& y, State& dy, double t) {
    const double yy = std::clamp(y[0], 0.0, m);
    const double q = std::min(Qi(std::max(t, eps), yy), -1e-300);
    dy[0] = sign * gas.supersonic_state(q).sqrt_b;
  };
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_controlled(opt.tol, opt.tol, ode::runge_kutta_dopri5<State>());
  ode::runge_kutta_dopri5<State> plain;

  CharacteristicPath path;
  State y{psi0};
  double t = phi0;
  path.phi.push_back(t);
  path.psi.push_back(y[0]);
  double dt = -std::min(1e-3 * phi0, 0.5 * (phi0 - eps));
  for (int step = 0; step < opt.max_steps; ++step) {
    if (t <= eps) {
      path.reached_cut = true;
      path.last_phi = t;
      return path;
    }
    if (t + dt < eps) dt = eps - t;
    if (std::abs(dt) < opt.min_step * t) {
      std::ostringstream msg;
      msg << "trace_characteristic: step underflow at phi = " << t;
      throw ConvergenceError(msg.str(), {});
    }
    State trial = y;
    double tt = t, dtt = dt;
    if (stepper.try_step(rhs, trial, tt, dtt) != ode::success) {
      dt = dtt;
      continue;
    }
    if (trial[0] < 0.0 || trial[0] > m) {
      // Locate the wall hit by bisection on a fixed-order step from (t, y).
      const double wall = trial[0] < 0.0 ? 0.0 : m;
      double lo = 0.0, hi = 1.0;
      for (int k = 0; k < 80; ++k) {
        const double mid = 0.5 * (lo + hi);
        State probe = y;
        plain.do_step(rhs, probe, t, mid * (tt - t));
        const bool crossed = wall == 0.0 ? probe[0] < 0.0 : probe[0] > m;
        (crossed ? hi : lo) = mid;
      }
      const double th = t + hi * (tt - t);
      t = th;
      y[0] = wall;
      path.bounce_phi.push_back(th);
      path.bounce_wall.push_back(wall == 0.0 ? 0 : 1);
      sign = -sign;
      path.phi.push_back(t);
      path.psi.push_back(y[0]);
      dt = dtt;
      continue;
    }
    t = tt;
    y = trial;
    dt = dtt;
    path.phi.push_back(t);
    path.psi.push_back(y[0]);
  }
  std::ostringstream msg;
  msg << "trace_characteristic: step limit reached at phi = " << t;
  throw ConvergenceError(msg.str(), {});
}

}  // namespace laval
