#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "laval/assembly.h"
#include "laval/config.h"
#include "laval/sonic_analysis.h"

namespace laval {

// One measured power law against its predicted exponent.
struct FitRow {
  std::string name;
  std::string formula;   // predicted exponent in terms of lambda
  double predicted = 0.0;
  double measured = 0.0;
  double r_squared = 0.0;
  int points = 0;
  std::string rule;      // "relative", "absolute" or "lower_bound"
  double tolerance = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  bool passed = false;
};

// Rows for the subsonic offset c* - q at mid-channel, -Q, -Q_phi, |Q_psi|
// (column maxima over psi) and the wall source h. Rows whose field is absent
// are omitted. Windows are [lo, hi] * |zeta| on the relevant side.
std::vector<FitRow> fit_report(const SubsonicField* sub, const SupersonicField* sup,
                               const NozzleSpec& spec, const GasModel& gas, double lo, double hi);

nlohmann::json fit_rows_json(const std::vector<FitRow>& rows);

// Solution and diagnostics of one transonic solve.
struct TransonicRun {
  SubsonicField sub;
  SupersonicField sup;
  TransonicSolution sol;
  ClosureReport closure;
  SonicDiagnostics sonic;
  int coincident = 0;         // sonic points whose characteristics stay on the sonic line
  double lipschitz = 0.0;     // largest Osgood constant over the sonic points
  DriftReport drift;
  CurvatureReport curvature;
};

TransonicRun solve_transonic(const RunConfig& cfg, const GasModel& gas);

nlohmann::json transonic_diagnostics(const TransonicRun& run);

// Per-level metrics of a refinement study.
struct LevelResult {
  int sub_n_phi = 0, sub_n_psi = 0, sup_n_psi = 0;
  double eps_fraction = 0.0, phi_ratio = 0.0;
  double qphi_minus = 0.0, qphi_plus = 0.0, qphi_gap = 0.0;
  double qpsi_sonic = 0.0;
  double exceptional_fraction = 0.0;
  double drift = 0.0;            // max relative invariant drift
  double curl = 0.0;
  double wall_error = 0.0, flux_drift = 0.0, mass_mismatch = 0.0;
};

struct ConvergenceTable {
  RunMode study = RunMode::transonic;
  std::vector<LevelResult> levels;
  std::vector<double> diff_sub, diff_sup;    // max-norm change between successive levels
  std::vector<double> order_sub, order_sup;  // log2 of successive difference ratios
  bool exact = false;                        // all differences at roundoff
  bool passed = false;                       // exact, or every order >= 1
};

// Refines the configured grid `levels - 1` times by 2 (both psi counts, the
// subsonic phi count and the supersonic eps fraction; the phi ratio follows
// n_psi or, if set explicitly, its square root). Differences are taken on the
// coarser level's nodes in coordinates scaled by zeta and m.
ConvergenceTable convergence_study(const RunConfig& cfg, int levels);

// Config of refinement level k (0 = as given).
RunConfig refined_config(const RunConfig& cfg, int k);

nlohmann::json convergence_json(const ConvergenceTable& t);

// Runs cfg.mode and writes its artifacts into `dir` (created if missing),
// ending with manifest.json. Returns the report that is also written to
// report.json. Throws on solver or validation failure.
nlohmann::json run_pipeline(const RunConfig& cfg, const std::string& dir, bool dump);

// Analysis of an imported potential-plane field (analyze mode / command).
nlohmann::json analyze_field(const PotentialField& field, const GasModel& gas);

// base/run-YYYYmmdd-HHMMSS-<mode>, with a numeric suffix if taken.
std::string make_run_directory(const std::string& base, RunMode mode);

}  // namespace laval
