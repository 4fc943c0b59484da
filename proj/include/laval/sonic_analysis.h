#pragma once

#include <functional>
#include <string>
#include <vector>

#include "laval/assembly.h"
#include "laval/gas_model.h"
#include "laval/nozzle.h"
#include "laval/supersonic.h"

namespace laval {

enum class Segment { minus, exceptional, plus };

const char* segment_name(Segment s);

struct SonicPoint {
  double phi = 0.0, psi = 0.0;
  double qpsi = 0.0;        // estimated q_psi at the point
  double error = 0.0;       // local discretization error estimate of qpsi
  double tolerance = 0.0;   // threshold used for the classification
  bool exceptional = false;
  Segment segment = Segment::exceptional;
};

struct SonicDiagnostics {
  std::vector<SonicPoint> points;  // ordered by psi, then phi
  std::vector<int> minus, exceptional, plus;  // indices into points
  bool exceptional_contiguous = true;
  bool order_consistent = true;   // minus < exceptional < plus by index
  double exceptional_fraction = 0.0;
  double max_qpsi = 0.0;
};

struct ClassifyOptions {
  double tol = 0.0;           // > 0: absolute |q_psi| threshold; else error_factor * estimate
  double error_factor = 5.0;
  double level_tol = 0.0;     // |q - c*| treated as sonic; 0: a few ulps of c*
};

// Extracts the sonic level set q = c* along grid lines (grid nodes at c* and
// linear roots on edges with a sign change) and classifies each point.
// q_psi at a point on a grid column is extrapolated linearly from the two
// nearest columns on the more finely spaced side; the change across one cell
// is the error estimate. Throws DomainError if there is no sonic point.
SonicDiagnostics classify_sonic_points(const PotentialField& field, const GasModel& gas,
                                       const ClassifyOptions& opt = {});

struct SonicCharacteristics {
  double phi0 = 0.0, psi0 = 0.0;
  bool exceptional = false;
  bool coincident = false;
  bool inward = true;  // false if the supersonic side of the point lies outside the domain
  std::vector<double> psi, phi_plus, phi_minus;  // d phi/d psi = +beta, -beta
  double displacement = 0.0;  // max |phi - phi0| over both paths
  double separation = 0.0;    // |phi_plus - phi_minus| at the last psi
  double lipschitz = 0.0;     // max beta / (phi - phi0) on supersonic nodes ahead
};

struct CharacteristicOptions {
  double coincidence_tol = 1e-10;  // relative to the phi extent of the field
  int steps_per_cell = 4;
};

// Integrates both characteristics from a sonic point in psi, with beta = 0
// where q <= c*: toward the supersonic side (upward on S+, downward on S-),
// and for exceptional points upward, or downward from the top wall. Throws
// DomainError if the outcome disagrees with the point's classification.
SonicCharacteristics characteristics_from_sonic(const PotentialField& field, const GasModel& gas,
                                                const SonicPoint& point,
                                                const CharacteristicOptions& opt = {});

struct DriftStart {
  double phi = 0.0, psi = 0.0;
  Family family = Family::plus;
};

struct PathDrift {
  DriftStart start;
  double drift = 0.0;     // max |I - I_segment_start| over the path
  double relative = 0.0;  // drift / max H(q) along the path
  int bounces = 0;
  int samples = 0;
};

struct DriftReport {
  std::vector<PathDrift> paths;
  double max_drift = 0.0;
  double max_relative = 0.0;
};

// `count` starts at phi = zeta/2, psi = (k + 1/2) m / count, alternating families.
std::vector<DriftStart> default_drift_starts(const SupersonicField& field, int count = 10);

// Traces each start backward to the cut and measures the drift of
// theta - H(q) (plus) or theta + H(q) (minus) along each segment between wall
// reflections. `block` supplies theta on the supersonic grid. Throws
// DomainError if a path sample has q - c* below `margin`.
DriftReport riemann_invariant_drift(const SupersonicField& field, const FieldBlock& block,
                                    const GasModel& gas, const std::vector<DriftStart>& starts,
                                    double margin = 0.0, const TraceOptions& trace = {});

struct CurvatureReport {
  bool vacuous = false;   // no plus segment, nothing to check
  bool passed = true;
  double x1 = 0.0;        // sonic curve endpoint on the wall
  double x_star = 0.0;    // endpoint of the extremal negative characteristic
  double min_d2f = 0.0;   // smallest f'' sampled on [x1, x_star]
  std::string note;
};

// wall_x maps phi on the top wall psi = m to the physical abscissa.
CurvatureReport wall_curvature_check(const NozzleSpec& spec, const SonicDiagnostics& diag,
                                     const PotentialField& field, const GasModel& gas,
                                     const std::function<double(double)>& wall_x,
                                     int samples = 200);

}  // namespace laval
