#pragma once

#include <functional>
#include <vector>

#include "laval/gas_model.h"
#include "laval/grid.h"
#include "laval/nozzle.h"

namespace laval {

struct SupersonicField;

struct SupersonicOptions {
  int n_psi = 32;               // cells in psi
  double phi_ratio = 0.0;       // growth of the phi cells away from the cut; 0: 1 + 0.8 / n_psi
  double eps_fraction = 1e-3;   // eps_cut / zeta_plus before snapping to a node
  double cfl = 0.8;
  double tol_contraction = 1e-11;  // relative weighted change of (W, Z)
  int max_contraction = 200;
  double tol_outer = 1e-10;
  int max_outer = 200;
  double damping = 0.5;
  int wall_samples = 0;         // 0: 2 * (phi nodes)
  bool sources = true;          // false drops the right-hand sides (transport only)
  double seed_scale = 1.0;      // multiplies the psi-averaged seed candidate
  std::function<void(int, const SupersonicField&)> observer;  // called per outer iteration
};

// Geometric phi-grid on [0, zeta] anchored at zeta: nodes zeta * r^-k for
// k = K..0 preceded by 0. K is chosen so the smallest positive node is the
// one nearest eps_fraction * zeta; that node is the cut.
std::vector<double> supersonic_phi_nodes(double zeta, double phi_ratio, double eps_fraction);

// The phi growth ratio in effect for `opt`.
double effective_phi_ratio(const SupersonicOptions& opt);

// Node samples of the sonic-supersonic solution. Row 0 is phi = 0, row 1 the
// cut eps_cut; rows below the cut hold the power-law extension.
struct SupersonicField {
  std::vector<double> phi, psi;
  Field2D Q, W, Z;
  std::vector<double> h;        // wall source at the phi nodes
  double zeta_plus = 0.0;
  double m = 0.0;
  double eps_cut = 0.0;
  double exponent = 0.0;        // power of the extension below the cut
  int inner_iterations = 0;     // of the last linear solve
  std::vector<double> contraction_history;  // weighted changes of that solve
  int outer_iterations = 0;
  std::vector<double> outer_history;
  BoundaryMaps maps;
};

// Frozen-coefficient input of the linear problem: a candidate Q (negative
// above the cut) and its first derivatives on the field grid.
struct Candidate {
  std::vector<double> phi, psi;
  Field2D Q, Q_phi, Q_psi;
};

// Builds the derivatives of a sampled candidate by local 4-point Lagrange
// differentiation (even reflection across psi = 0).
Candidate make_candidate(std::vector<double> phi, std::vector<double> psi, Field2D Q);

// h(phi) = 2 Theta'(X(phi)) cos Theta(X(phi)) / (sqrt(b(Q)) A+^-1(Q)) with Q
// the candidate wall row. Zero at phi = 0.
std::vector<double> wall_source(const NozzleSpec& spec, const BoundaryMaps& maps,
                                const GasModel& gas, const std::vector<double>& phi,
                                const std::vector<double>& Q_wall);

struct LinearSolution {
  Field2D W, Z;
  int iterations = 0;
  std::vector<double> history;  // weighted change per contraction step
  std::vector<double> ratios;   // successive change ratios
};

// Solves the linear transport system for (W, Z) with coefficients frozen at
// the candidate, zero data at the cut, W + Z = 0 at psi = 0 and W + Z = h at
// psi = m, by semi-Lagrangian marching with an exponential source update. The
// partner unknown in each source is lagged and the map iterated to its fixed
// point. `start`, if non-null, supplies the initial lag fields.
// `weight_exponent` sets the norm |.| / phi^k used for the change.
LinearSolution solve_linear(const Candidate& cand, const GasModel& gas,
                            const std::vector<double>& h, int cut_row,
                            double weight_exponent, const SupersonicOptions& opt,
                            const LinearSolution* start = nullptr);

// Q = Q(eps) + int_eps^phi (W - Z)/2 on rows >= cut_row, and
// Q(eps) (phi/eps)^exponent below. Q_eps holds the cut values per psi node.
Field2D integrate_Q(const std::vector<double>& phi, const Field2D& W, const Field2D& Z,
                    int cut_row, const std::vector<double>& Q_eps, double exponent);

// Outer fixed point on the downstream wall speed.
SupersonicField supersonic_fixed_point(const NozzleSpec& spec, const GasModel& gas,
                                       const SupersonicOptions& opt);

enum class Family { plus, minus };

struct CharacteristicPath {
  std::vector<double> phi, psi;  // decreasing phi
  std::vector<double> bounce_phi;  // wall hits, in order of decreasing phi
  std::vector<int> bounce_wall;    // 0 for psi = 0, 1 for psi = m
  bool reached_cut = false;
  double last_phi = 0.0;
};

struct TraceOptions {
  double tol = 1e-10;
  double min_step = 1e-16;  // relative to the current phi
  int max_steps = 200000;
};

// Traces d psi/d phi = +-sqrt(b(Q)) backward in phi from `start`, reflecting
// at psi = 0 and psi = m (the family flips at each hit), until phi = eps_cut.
CharacteristicPath trace_characteristic(const SupersonicField& field, const GasModel& gas,
                                        double phi0, double psi0, Family family,
                                        const TraceOptions& opt = {});

}  // namespace laval
