#include "laval/subsonic.h"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <limits>

#include "laval/errors.h"
#include "laval/interpolation.h"

namespace laval {

SubsonicProblem make_subsonic_problem(const NozzleSpec& spec, const GasModel& gas,
                                      const BoundaryMaps& maps, const SubsonicOptions& opt) {
  if (!maps.has_upstream()) throw std::invalid_argument("subsonic problem needs upstream maps");
  SubsonicProblem pb;
  pb.phi = graded_nodes(maps.zeta_minus, 0.0, opt.n_phi, opt.grading_ratio, opt.max_stretch,
                        ClusterEnd::upper);
  pb.psi = uniform_nodes(0.0, maps.m_in, opt.n_psi);

  const MonotoneCubic q_in(maps.q_in.s, maps.q_in.q);
  const MonotoneCubic q_wall(maps.q_wall_minus.s, maps.q_wall_minus.q);
  pb.inlet_flux.resize(pb.psi.size());
  for (size_t j = 0; j < pb.psi.size(); ++j) {
    const double y = std::clamp(maps.Y_in(pb.psi[j]), 0.0, spec.inlet_height());
    const double q = q_in(y);
    pb.inlet_flux[j] = -spec.inlet_angle_rate(y) * std::cos(spec.inlet_angle(y)) /
                       (q * gas.density(q * q));
  }
  pb.wall_flux.resize(pb.phi.size());
  for (size_t i = 0; i < pb.phi.size(); ++i) {
    const double x = std::clamp(maps.X_minus(pb.phi[i]), spec.l_minus, 0.0);
    pb.wall_flux[i] = spec.wall_angle_rate(x) * std::cos(spec.wall_angle(x)) / q_wall(x);
  }
  // Face positions of the control volumes, mapped back to the boundary curves.
  const size_t N = pb.phi.size() - 1, M = pb.psi.size() - 1;
  pb.wall_cell.resize(N + 1);
  for (size_t i = 0; i <= N; ++i) {
    const double a = i > 0 ? 0.5 * (pb.phi[i - 1] + pb.phi[i]) : pb.phi[0];
    const double b = i < N ? 0.5 * (pb.phi[i] + pb.phi[i + 1]) : pb.phi[N];
    const double xa = i > 0 ? std::clamp(maps.X_minus(a), spec.l_minus, 0.0) : spec.l_minus;
    const double xb = i < N ? std::clamp(maps.X_minus(b), spec.l_minus, 0.0) : 0.0;
    pb.wall_cell[i] = spec.wall_angle(xb) - spec.wall_angle(xa);
  }
  pb.inlet_cell.resize(M + 1);
  const double h = spec.inlet_height();
  for (size_t j = 0; j <= M; ++j) {
    const double a = j > 0 ? 0.5 * (pb.psi[j - 1] + pb.psi[j]) : 0.0;
    const double b = j < M ? 0.5 * (pb.psi[j] + pb.psi[j + 1]) : pb.psi[M];
    const double ya = j > 0 ? std::clamp(maps.Y_in(a), 0.0, h) : 0.0;
    const double yb = j < M ? std::clamp(maps.Y_in(b), 0.0, h) : h;
    pb.inlet_cell[j] = spec.inlet_angle(ya) - spec.inlet_angle(yb);
  }
  return pb;
}

namespace {

struct NodeValues {
  std::vector<double> A, dA, B, dB;  // dA, dB are derivatives in q
};

// Nodal A, B and their q-derivatives from u = c* - q. Above c* (u < 0) A is
// continued by odd reflection about c*, which keeps the scheme monotone so a
// roundoff-sized excursion at the degenerate corner cannot stall Newton.
void evaluate_nodes(const GasModel& gas, const std::vector<double>& u, NodeValues& nv) {
  const size_t n = u.size();
  nv.A.resize(n);
  nv.dA.resize(n);
  nv.B.resize(n);
  nv.dB.resize(n);
  for (size_t k = 0; k < n; ++k) {
    const double t = -u[k];
    if (u[k] >= 0.0) {
      nv.A[k] = gas.A_offset(t);
      nv.dA[k] = gas.dA_offset(t);
    } else {
      nv.A[k] = -gas.A_offset(u[k]);
      nv.dA[k] = gas.dA_offset(u[k]);
    }
    nv.B[k] = gas.B_offset(t);
    nv.dB[k] = gas.dB(gas.c_star() + t);
  }
}

struct Stencil {
  int N, M;
  std::vector<double> h, k, wphi, wpsi;
  std::vector<double> inlet, wall;  // cell-integrated boundary data
  int node(int i, int j) const { return i * (M + 1) + j; }
};

Stencil make_stencil(const SubsonicProblem& pb) {
  Stencil st;
  st.N = static_cast<int>(pb.phi.size()) - 1;
  st.M = static_cast<int>(pb.psi.size()) - 1;
  if (st.N < 1 || st.M < 1) throw std::invalid_argument("subsonic grid needs >= 1 cell each way");
  if (static_cast<int>(pb.inlet_flux.size()) != st.M + 1 ||
      static_cast<int>(pb.wall_flux.size()) != st.N + 1) {
    throw std::invalid_argument("subsonic boundary data does not match the grid");
  }
  st.h.resize(st.N);
  st.k.resize(st.M);
  for (int i = 0; i < st.N; ++i) st.h[i] = pb.phi[i + 1] - pb.phi[i];
  for (int j = 0; j < st.M; ++j) st.k[j] = pb.psi[j + 1] - pb.psi[j];
  st.wphi.resize(st.N + 1);
  st.wpsi.resize(st.M + 1);
  for (int i = 0; i <= st.N; ++i) {
    st.wphi[i] = 0.5 * ((i > 0 ? st.h[i - 1] : 0.0) + (i < st.N ? st.h[i] : 0.0));
  }
  for (int j = 0; j <= st.M; ++j) {
    st.wpsi[j] = 0.5 * ((j > 0 ? st.k[j - 1] : 0.0) + (j < st.M ? st.k[j] : 0.0));
  }
  if (!pb.inlet_cell.empty() || !pb.wall_cell.empty()) {
    if (static_cast<int>(pb.inlet_cell.size()) != st.M + 1 ||
        static_cast<int>(pb.wall_cell.size()) != st.N + 1) {
      throw std::invalid_argument("subsonic cell data does not match the grid");
    }
    st.inlet = pb.inlet_cell;
    st.wall = pb.wall_cell;
  } else {
    st.inlet.resize(st.M + 1);
    st.wall.resize(st.N + 1);
    for (int j = 0; j <= st.M; ++j) st.inlet[j] = st.wpsi[j] * pb.inlet_flux[j];
    for (int i = 0; i <= st.N; ++i) st.wall[i] = st.wphi[i] * pb.wall_flux[i];
  }
  return st;
}

// Conservative residual at unknown nodes (i < N). Returns the largest ratio of
// a row's residual to the magnitude of the terms entering it, so that nodes
// with tiny values near the sonic column are judged on their own scale.
struct ResidualNorms {
  double worst = 0.0;     // max over rows of |R| / term magnitude
  double weighted = 0.0;  // l2 of the same ratios
};

ResidualNorms residual(const Stencil& st, const NodeValues& nv, std::vector<double>& R) {
  const int N = st.N, M = st.M;
  R.assign(static_cast<size_t>(N) * (M + 1), 0.0);
  ResidualNorms out;
  double sum2 = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j <= M; ++j) {
      const int c = st.node(i, j);
      const double fp = st.wpsi[j] * (nv.A[st.node(i + 1, j)] - nv.A[c]) / st.h[i];
      const double fm = i > 0 ? st.wpsi[j] * (nv.A[c] - nv.A[st.node(i - 1, j)]) / st.h[i - 1]
                              : st.inlet[j];
      const double gp = j < M ? st.wphi[i] * (nv.B[st.node(i, j + 1)] - nv.B[c]) / st.k[j]
                              : st.wall[i];
      const double gm = j > 0 ? st.wphi[i] * (nv.B[c] - nv.B[st.node(i, j - 1)]) / st.k[j - 1]
                              : 0.0;
      R[c] = (fp - fm) + (gp - gm);
      const double mag =
          st.wpsi[j] * std::abs(nv.A[c]) * (1.0 / st.h[i] + (i > 0 ? 1.0 / st.h[i - 1] : 0.0)) +
          (i > 0 ? 0.0 : std::abs(fm)) +
          st.wphi[i] * std::abs(nv.B[c]) *
              ((j < M ? 1.0 / st.k[j] : 0.0) + (j > 0 ? 1.0 / st.k[j - 1] : 0.0)) +
          (j < M ? 0.0 : std::abs(gp));
      if (mag > 0.0) {
        const double r = std::abs(R[c]) / mag;
        out.worst = std::max(out.worst, r);
        sum2 += r * r;
      }
    }
  }
  out.weighted = std::sqrt(sum2);
  return out;
}

double scaled_max(const Stencil& st, const std::vector<double>& R) {
  double m = 0.0;
  for (int i = 0; i < st.N; ++i) {
    for (int j = 0; j <= st.M; ++j) {
      m = std::max(m, std::abs(R[st.node(i, j)]) / (st.wphi[i] * st.wpsi[j]));
    }
  }
  return m;
}

}  // namespace

SubsonicField solve_regularized(const SubsonicProblem& pb, const GasModel& gas, double c,
                                const SubsonicOptions& opt, const Field2D* guess) {
  const double cs = gas.c_star();
  if (!(c > 0.0) || !(c <= cs)) {
    std::ostringstream msg;
    msg << "outlet value " << c << " outside (0, c*]";
    throw DomainError(msg.str());
  }
  const Stencil st = make_stencil(pb);
  const int N = st.N, M = st.M;
  const int n_all = (N + 1) * (M + 1);
  const int n_unk = N * (M + 1);
  const double u_out = cs - c;

  std::vector<double> u(n_all, u_out);
  if (guess) {
    if (guess->n0() != N + 1 || guess->n1() != M + 1) {
      throw std::invalid_argument("solve_regularized: guess does not match the grid");
    }
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j <= M; ++j) {
        u[st.node(i, j)] = std::clamp(cs - (*guess)(i, j), 0.0, cs * (1.0 - 1e-12));
      }
    }
  }
  for (int j = 0; j <= M; ++j) u[st.node(N, j)] = u_out;

  NodeValues nv;
  evaluate_nodes(gas, u, nv);
  std::vector<double> R;
  const double kRoundoff = 256.0 * std::numeric_limits<double>::epsilon();
  ResidualNorms norms = residual(st, nv, R);
  double rel = norms.worst;
  double merit = norms.weighted;

  Eigen::SparseMatrix<double> J(n_unk, n_unk);
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(n_unk) * 5);

  bool converged = rel <= kRoundoff;
  int it = 0;
  std::vector<double> history;
  for (; !converged && it < opt.max_newton; ++it) {
    // Jacobian with respect to u = c* - q, so every q-derivative flips sign.
    trip.clear();
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j <= M; ++j) {
        const int r = st.node(i, j);
        double diag = -st.wpsi[j] * nv.dA[r] / st.h[i];
        if (i > 0) {
          diag -= st.wpsi[j] * nv.dA[r] / st.h[i - 1];
          trip.emplace_back(r, st.node(i - 1, j), -st.wpsi[j] * nv.dA[st.node(i - 1, j)] / st.h[i - 1]);
        }
        if (i + 1 < N) {
          trip.emplace_back(r, st.node(i + 1, j), -st.wpsi[j] * nv.dA[st.node(i + 1, j)] / st.h[i]);
        }
        if (j < M) {
          diag -= st.wphi[i] * nv.dB[r] / st.k[j];
          trip.emplace_back(r, st.node(i, j + 1), -st.wphi[i] * nv.dB[st.node(i, j + 1)] / st.k[j]);
        }
        if (j > 0) {
          diag -= st.wphi[i] * nv.dB[r] / st.k[j - 1];
          trip.emplace_back(r, st.node(i, j - 1), -st.wphi[i] * nv.dB[st.node(i, j - 1)] / st.k[j - 1]);
        }
        trip.emplace_back(r, r, -diag);
      }
    }
    J.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) {
      throw ConvergenceError("subsonic Newton: singular Jacobian", history);
    }
    Eigen::VectorXd rhs(n_unk);
    for (int r = 0; r < n_unk; ++r) rhs[r] = -R[r];
    const Eigen::VectorXd du = lu.solve(rhs);

    // Backtrack until the trial state stays in (0, c*) with u >= 0 and the
    // residual decreases.
    double alpha = 1.0;
    std::vector<double> trial(u);
    NodeValues nv_trial;
    std::vector<double> R_trial;
    double merit_trial = 0.0, rel_trial = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
      bool feasible = true;
      for (int r = 0; r < n_unk; ++r) {
        trial[r] = u[r] + alpha * du[r];
        if (!(trial[r] > cs - 0.5 * (gas.q_max() + cs)) || !(trial[r] < cs)) {
          feasible = false;
          break;
        }
      }
      if (!feasible) continue;
      evaluate_nodes(gas, trial, nv_trial);
      const ResidualNorms nt = residual(st, nv_trial, R_trial);
      rel_trial = nt.worst;
      merit_trial = nt.weighted;
      if (merit_trial <= (1.0 - 1e-4 * alpha) * merit || alpha < 1.0 / 1024.0) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw ConvergenceError("subsonic Newton: line search failed to keep q in (0, c*]", history);
    }
    double step = 0.0;
    for (int r = 0; r < n_unk; ++r) {
      const double d = std::abs(trial[r] - u[r]);
      const double v = d / (std::abs(trial[r]) + 1e-18);
      step = std::max(step, v);
    }
    u.swap(trial);
    nv = std::move(nv_trial);
    R.swap(R_trial);
    merit = merit_trial;
    rel = rel_trial;
    history.push_back(merit);
    converged = step <= opt.tol_inner || rel <= kRoundoff;
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "subsonic Newton did not converge in " << opt.max_newton << " iterations";
    throw ConvergenceError(msg.str(), history);
  }

  // Excursions above c* beyond roundoff mean the data admit no subsonic
  // solution on this grid.
  double excursion = 0.0;
  for (int r = 0; r < n_unk; ++r) excursion = std::max(excursion, -u[r]);
  if (excursion > opt.excursion_tol) {
    std::ostringstream msg;
    msg << "loss of subsonicity: q exceeds c* by " << excursion;
    throw DomainError(msg.str());
  }
  for (int r = 0; r < n_unk; ++r) u[r] = std::max(u[r], 0.0);

  SubsonicField out;
  out.excursion = excursion;
  out.phi = pb.phi;
  out.psi = pb.psi;
  out.q = Field2D(N + 1, M + 1);
  out.offset = Field2D(N + 1, M + 1);
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= M; ++j) {
      out.offset(i, j) = u[st.node(i, j)];
      out.q(i, j) = cs - u[st.node(i, j)];
    }
  }
  out.c_outlet = c;
  out.residual = scaled_max(st, R);
  out.newton_iterations = it;
  double balance = 0.0;
  for (int j = 0; j <= M; ++j) {
    balance += st.wpsi[j] * (nv.A[st.node(N, j)] - nv.A[st.node(N - 1, j)]) / st.h[N - 1];
  }
  out.flux_balance = balance;
  return out;
}

std::vector<double> default_schedule(const GasModel& gas, double gap) {
  std::vector<double> s;
  const double cs = gas.c_star();
  for (int k = 1; k < 200; ++k) {
    const double c = cs * (1.0 - std::ldexp(1.0, -k) / 3.0);
    s.push_back(c);
    if (cs - c < gap * cs) break;
  }
  return s;
}

namespace {

// The sonic limit: shift a regularized field by its outlet offset so the
// near-outlet nodes start close to their degenerate values.
SubsonicField sonic_from(const SubsonicProblem& pb, const GasModel& gas,
                         const SubsonicField& field, const SubsonicOptions& opt) {
  const double cs = gas.c_star();
  const double shift = cs - field.c_outlet;
  Field2D start = field.q;
  for (int i = 0; i < start.n0(); ++i) {
    for (int j = 0; j < start.n1(); ++j) start(i, j) = std::min(cs, field.q(i, j) + shift);
  }
  return solve_regularized(pb, gas, cs, opt, &start);
}

}  // namespace

SubsonicField continue_to_sonic(const SubsonicProblem& pb, const GasModel& gas,
                                const std::vector<double>& schedule, const SubsonicOptions& opt,
                                const Field2D* guess) {
  const double cs = gas.c_star();
  for (size_t k = 1; k < schedule.size(); ++k) {
    if (!(schedule[k] > schedule[k - 1])) {
      throw std::invalid_argument("continuation schedule must increase");
    }
  }
  SubsonicField field;
  bool have = false;
  for (double c : schedule) {
    if (c >= cs) break;
    if (!have && guess) {
      // A guess taken from a sonic solution is lowered by the outlet gap so
      // no node starts on the degenerate level.
      Field2D lowered = *guess;
      for (int i = 0; i < lowered.n0(); ++i) {
        for (int j = 0; j < lowered.n1(); ++j) lowered(i, j) = std::min(lowered(i, j), cs) - (cs - c);
      }
      field = solve_regularized(pb, gas, c, opt, &lowered);
    } else {
      field = solve_regularized(pb, gas, c, opt, have ? &field.q : guess);
    }
    have = true;
  }
  if (!have) return solve_regularized(pb, gas, cs, opt, guess);
  return sonic_from(pb, gas, field, opt);
}

namespace {

double interp_offset_column(const SubsonicField& f, int i, double psi) {
  std::vector<double> col(f.psi.size());
  for (size_t j = 0; j < col.size(); ++j) col[j] = f.offset(i, static_cast<int>(j));
  return lagrange_interp(f.psi, col, psi);
}

double interp_offset_row(const SubsonicField& f, int j, double phi) {
  std::vector<double> row(f.phi.size());
  for (size_t i = 0; i < row.size(); ++i) row[i] = f.offset(static_cast<int>(i), j);
  return lagrange_interp(f.phi, row, phi);
}

}  // namespace

SubsonicField subsonic_fixed_point(const NozzleSpec& spec, const GasModel& gas,
                                   const SubsonicOptions& opt, double seed_speed) {
  const double cs = gas.c_star();
  if (!(seed_speed > 0.0) || !(seed_speed <= cs)) {
    throw std::invalid_argument("subsonic seed speed must lie in (0, c*]");
  }
  const int n_wall = opt.wall_samples > 0 ? opt.wall_samples : 2 * opt.n_phi;
  const int n_inlet = opt.inlet_samples > 0 ? opt.inlet_samples : 2 * opt.n_psi;
  SpeedSamples q_in, q_wall;
  q_in.s = uniform_nodes(0.0, spec.inlet_height(), n_inlet);
  q_in.q.assign(q_in.s.size(), seed_speed);
  q_wall.s = graded_nodes(spec.l_minus, 0.0, n_wall, opt.grading_ratio, opt.max_stretch,
                          ClusterEnd::upper);
  q_wall.q.assign(q_wall.s.size(), seed_speed);
  const std::vector<double> schedule = default_schedule(gas, opt.continuation_gap);
  // Warm starts only revisit the near-sonic end of the schedule, each level
  // from its own solution in the previous outer iteration.
  std::vector<double> tail;
  for (double c : schedule) {
    if (cs - c < 2.5e-6 * cs) tail.push_back(c);
  }
  if (tail.empty()) tail.push_back(schedule.back());
  std::vector<Field2D> tail_fields;

  std::vector<double> history;
  Field2D warm;
  for (int it = 1; it <= opt.max_outer; ++it) {
    BoundaryMaps maps = build_maps(spec, gas, q_in, q_wall, {});
    SubsonicProblem pb = make_subsonic_problem(spec, gas, maps, opt);
    SubsonicField field;
    if (warm.empty()) {
      // Full continuation, remembering the tail levels.
      SubsonicField level;
      bool have = false;
      for (double c : schedule) {
        level = solve_regularized(pb, gas, c, opt, have ? &level.q : nullptr);
        have = true;
        if (cs - c < 2.5e-6 * cs || c == tail.front()) tail_fields.push_back(level.q);
      }
      field = sonic_from(pb, gas, level, opt);
    } else {
      SubsonicField level;
      for (size_t k = 0; k < tail.size(); ++k) {
        level = solve_regularized(pb, gas, tail[k], opt, &tail_fields[k]);
        tail_fields[k] = level.q;
      }
      field = sonic_from(pb, gas, level, opt);
    }
    const int M = static_cast<int>(field.psi.size()) - 1;
    double change = 0.0;
    std::vector<double> new_in(q_in.s.size()), new_wall(q_wall.s.size());
    for (size_t k = 0; k < q_in.s.size(); ++k) {
      const double psi = std::clamp(maps.Psi_in(q_in.s[k]), 0.0, maps.m_in);
      new_in[k] = cs - interp_offset_column(field, 0, psi);
      change = std::max(change, std::abs(new_in[k] - q_in.q[k]));
    }
    for (size_t k = 0; k < q_wall.s.size(); ++k) {
      const double phi = std::clamp(maps.Phi_minus(q_wall.s[k]), maps.zeta_minus, 0.0);
      new_wall[k] = k + 1 == q_wall.s.size() ? cs : cs - interp_offset_row(field, M, phi);
      change = std::max(change, std::abs(new_wall[k] - q_wall.q[k]));
    }
    history.push_back(change);
    if (opt.observer) {
      field.outer_iterations = it;
      field.outer_history = history;
      opt.observer(it, field);
    }
    warm = field.q;
    if (change <= opt.tol_outer) {
      field.outer_iterations = it;
      field.outer_history = history;
      field.m = maps.m;
      field.m_in = maps.m_in;
      field.zeta_minus = maps.zeta_minus;
      field.maps = std::move(maps);
      return field;
    }
    for (size_t k = 0; k < q_in.q.size(); ++k) {
      q_in.q[k] += opt.damping * (new_in[k] - q_in.q[k]);
    }
    for (size_t k = 0; k < q_wall.q.size(); ++k) {
      q_wall.q[k] += opt.damping * (new_wall[k] - q_wall.q[k]);
    }
    if (!std::isfinite(change)) break;
  }
  throw ConvergenceError("subsonic outer iteration did not converge", history);
}

double subsonic_supersolution(double c_star, double phi, double psi, double eps0) {
  return 2.0 / 3.0 * c_star - 2.0 * phi - phi * phi + eps0 * psi * psi;
}

double subsonic_subsolution(const GasModel& gas, double c, double mu2, double phi) {
  return gas.A_inv(gas.A(c) + mu2 * phi, Branch::subsonic);
}

}  // namespace laval
