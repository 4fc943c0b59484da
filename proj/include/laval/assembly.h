#pragma once

#include <vector>

#include "laval/gas_model.h"
#include "laval/grid.h"
#include "laval/nozzle.h"
#include "laval/subsonic.h"
#include "laval/supersonic.h"

namespace laval {

// One side of the solution on its own rectilinear potential-plane grid.
// theta_phi / theta_psi, when present, are the Chaplygin gradient of the
// flow angle supplied by the solver; otherwise they are differenced from q.
struct FieldBlock {
  std::vector<double> phi, psi;
  Field2D q, theta, x, y;
  Field2D theta_phi, theta_psi;
  int first_fine_row = 0;  // rows below this index stay out of phi stencils
};

struct MatchingReport {
  double qphi_minus = 0.0;  // max |q_phi(0-, psi)|
  double qphi_plus = 0.0;   // max |q_phi(0+, psi)|
  double qphi_gap = 0.0;    // max |q_phi(0-) - q_phi(0+)|
  double qpsi_sonic = 0.0;  // max |q_psi| on the sonic column, both sides
  double mass_mismatch = 0.0;  // |m_in - m| / m
};

struct TransonicSolution {
  FieldBlock sub, sup;  // sub: phi in [zeta_minus, 0]; sup: phi in [0, zeta_plus]
  double m = 0.0;
  double zeta_minus = 0.0, zeta_plus = 0.0;
  MatchingReport matching;
  double curl_residual = 0.0;  // max gap between the phi- and psi-route angles
  bool has_theta = false;
  bool has_xy = false;
};

// Joins the two sides on phi = 0. Either field may be null for a one-sided
// solution. Throws DomainError if the mass fluxes differ by more than mass_tol.
TransonicSolution connect(const SubsonicField* sub, const SupersonicField* sup,
                          const GasModel& gas, double mass_tol = 1e-6);

// theta from theta = 0 on the sonic line, integrating theta_phi = B'(q) q_psi
// along the rows. The psi-route (theta_psi = -A'(q) q_phi from theta = 0 on the
// axis) is integrated as a check; its largest gap is the curl residual, and
// exceeding curl_threshold throws.
void reconstruct_theta(TransonicSolution& sol, const GasModel& gas,
                       double curl_threshold = 1e300);

// Physical coordinates from x = 0, y = psi / (rho* c*) on the sonic line.
void to_physical(TransonicSolution& sol, const GasModel& gas, double q_floor = 1e-8);

struct ClosureReport {
  double wall_error = 0.0;        // max |y - f(x)| / f0 along both wall rows
  double wall_angle_error = 0.0;  // max |theta - arctan f'(x)| along both wall rows
  std::vector<double> station_x, station_flux;
  double flux_drift = 0.0;  // (max - min) / m over the stations
};

ClosureReport physical_closure(const TransonicSolution& sol, const NozzleSpec& spec,
                               const GasModel& gas, int stations = 5);

// Single-grid view over [zeta_minus, zeta_plus] x [0, m] on the subsonic psi
// nodes, for analysis and export. The sonic column appears once.
struct PotentialField {
  std::vector<double> phi, psi;
  Field2D q, theta;
};

PotentialField combined_field(const TransonicSolution& sol);

}  // namespace laval
