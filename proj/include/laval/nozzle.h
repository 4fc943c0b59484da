#pragma once

#include <functional>
#include <string>
#include <vector>

#include "laval/gas_model.h"
#include "laval/interpolation.h"

namespace laval {

using ScalarMap = std::function<double(double)>;

// Upper wall y = f(x), x in [l_minus, l_plus], throat at x = 0.
struct WallProfile {
  ScalarMap f, df, d2f, d3f;
};

// Inlet curve x = g(y), y in [0, f(l_minus)].
struct InletProfile {
  ScalarMap g, dg, d2g;
};

struct NozzleSpec {
  double l_minus = -0.3;
  double l_plus = 0.3;
  double f0 = 1.0;
  double lambda_minus = 3.0;
  double lambda_plus = 3.0;
  double delta1_minus = 0.1, delta2_minus = 0.1;
  double delta1_plus = 0.1, delta2_plus = 0.1;
  WallProfile wall;
  InletProfile inlet;

  double inlet_height() const { return wall.f(l_minus); }
  // Flow angle on the walls and the inlet, and its arclength-parameter rate.
  double wall_angle(double x) const;
  double wall_angle_rate(double x) const;
  double inlet_angle(double y) const;
  double inlet_angle_rate(double y) const;
};

// f(x) = f0 + delta |x|^(lambda+2) / ((lambda+1)(lambda+2)) on each side, with
// the circular-arc inlet normal to the wall at x = l_minus. delta = 0 gives the
// straight channel used as an exactness fixture.
NozzleSpec default_wall(double l_minus, double l_plus, double f0, double lambda_minus,
                        double lambda_plus, double delta);

struct ConditionResult {
  std::string name;
  bool passed = true;
  double worst_x = 0.0;     // location of the largest violation (or tightest margin)
  double worst_value = 0.0; // violation size, or the measured constant for report rows
  std::string note;
};

struct AdmissibilityReport {
  std::vector<ConditionResult> conditions;
  std::vector<std::string> warnings;
  bool passed() const;
  const ConditionResult& find(const std::string& name) const;
};

// Samples the curvature envelope, inlet compatibility and inlet curvature
// window. Report-only; never throws for a bad geometry. |l| above
// `length_warning` produces a warning rather than a failure.
AdmissibilityReport validate(const NozzleSpec& spec, double length_warning = 0.5);

// Throat mass flux f(0) * rho(c*^2) * c*.
double mass_flux(const NozzleSpec& spec, const GasModel& gas);

// Speed samples along a boundary curve, parametrized by x (walls) or y (inlet).
struct SpeedSamples {
  std::vector<double> s;
  std::vector<double> q;
  bool empty() const { return s.empty(); }
};

struct BoundaryMaps {
  double m = 0.0;
  double m_in = 0.0;
  double zeta_minus = 0.0;
  double zeta_plus = 0.0;
  MonotoneCubic Phi_minus, X_minus;  // x <-> phi on the upstream wall
  MonotoneCubic Phi_plus, X_plus;    // x <-> phi on the downstream wall
  MonotoneCubic Psi_in, Y_in;        // y <-> psi on the inlet
  SpeedSamples q_in, q_wall_minus, q_wall_plus;
  bool has_upstream() const { return !q_wall_minus.empty(); }
  bool has_downstream() const { return !q_wall_plus.empty(); }
};

// Cumulative trapezoid integration of psi' = q rho / cos(theta_in) on the
// inlet and phi' = q / cos(theta) on the walls. Either side may be omitted by
// passing empty samples (the inlet goes with the upstream wall).
BoundaryMaps build_maps(const NozzleSpec& spec, const GasModel& gas, const SpeedSamples& q_in,
                        const SpeedSamples& q_wall_minus, const SpeedSamples& q_wall_plus);

}  // namespace laval
