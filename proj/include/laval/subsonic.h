#pragma once

#include <functional>
#include <vector>

#include "laval/gas_model.h"
#include "laval/grid.h"
#include "laval/nozzle.h"

namespace laval {

struct SubsonicField;

struct SubsonicOptions {
  int n_phi = 256;          // cells in phi
  int n_psi = 64;           // cells in psi
  double grading_ratio = 1.1;
  double max_stretch = 100.0;
  double tol_inner = 1e-13;  // Newton update, absolute in q
  int max_newton = 60;
  double excursion_tol = 1e-9;  // tolerated q - c* on output before it is an error
  double tol_outer = 1e-8;   // sup-change of the boundary speeds
  int max_outer = 200;
  double damping = 0.5;
  double continuation_gap = 1e-6;  // stop the schedule once c* - c < gap * c*
  int wall_samples = 0;     // 0: 2 * n_phi
  int inlet_samples = 0;    // 0: 2 * n_psi
  std::function<void(int, const SubsonicField&)> observer;  // called per outer iteration
};

// Grid and Neumann data for one inner solve on [zeta_minus, 0] x [0, m_in].
// The scheme consumes cell-integrated data: inlet_cell[j] is the integral of
// dA/dphi over the psi-extent of node j's control volume, wall_cell[i] that of
// dB/dpsi over the phi-extent of node i's. Pointwise values are kept for
// reporting and are integrated with the control-volume widths when the cell
// arrays are left empty.
struct SubsonicProblem {
  std::vector<double> phi;          // increasing, phi.back() == 0
  std::vector<double> psi;          // increasing from 0
  std::vector<double> inlet_flux;   // dA(q)/dphi at phi = phi[0], per psi node
  std::vector<double> wall_flux;    // dB(q)/dpsi at psi = psi.back(), per phi node
  std::vector<double> inlet_cell;
  std::vector<double> wall_cell;
};

struct SubsonicField {
  std::vector<double> phi, psi;
  Field2D q;
  Field2D offset;  // c* - q, kept separately for relative accuracy near sonic
  double c_outlet = 0.0;
  double excursion = 0.0;     // largest q - c* clipped on output
  double residual = 0.0;      // max scaled residual of the last inner solve
  int newton_iterations = 0;  // of the last inner solve
  // outer-iteration bookkeeping
  int outer_iterations = 0;
  std::vector<double> outer_history;
  double m = 0.0, m_in = 0.0, zeta_minus = 0.0;
  double flux_balance = 0.0;  // sum of phi-fluxes through the sonic column
  BoundaryMaps maps;
};

// Builds grid and lagged Neumann data from the current boundary maps. Cell
// integrals are exact: along the wall the data integrate to the change of the
// wall angle between the mapped face positions, on the inlet to the change of
// the inlet angle, so the discrete totals telescope to the true turning.
SubsonicProblem make_subsonic_problem(const NozzleSpec& spec, const GasModel& gas,
                                      const BoundaryMaps& maps, const SubsonicOptions& opt);

// Solves (A(q))_phiphi + (B(q))_psipsi = 0 with the problem's Neumann data and
// q = c on phi = 0. Damped Newton on the conservative five-point scheme.
// `guess`, if given, must cover the problem grid.
SubsonicField solve_regularized(const SubsonicProblem& problem, const GasModel& gas, double c,
                                const SubsonicOptions& opt, const Field2D* guess = nullptr);

// Default schedule c_k = c*(1 - 2^-k / 3) until within the continuation gap.
std::vector<double> default_schedule(const GasModel& gas, double gap = 1e-6);

// Warm-started solves along the schedule, then one solve with q = c* on the
// boundary as the sonic limit.
SubsonicField continue_to_sonic(const SubsonicProblem& problem, const GasModel& gas,
                                const std::vector<double>& schedule, const SubsonicOptions& opt,
                                const Field2D* guess = nullptr);

// Fixed point of the boundary map J seeded with a constant speed on the inlet
// and on the upstream wall. Throws ConvergenceError on outer divergence.
SubsonicField subsonic_fixed_point(const NozzleSpec& spec, const GasModel& gas,
                                   const SubsonicOptions& opt, double seed_speed);

// Closed-form barrier fields for the comparison checks.
double subsonic_supersolution(double c_star, double phi, double psi, double eps0);
double subsonic_subsolution(const GasModel& gas, double c, double mu2, double phi);

}  // namespace laval
