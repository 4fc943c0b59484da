#include "laval/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <limits>
#include <sstream>

#include "laval/errors.h"
#include "laval/fitting.h"
#include "laval/interpolation.h"
#include "laval/io.h"

namespace laval {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

FitRow make_row(const std::string& name, const std::string& formula, double predicted,
                const std::string& rule, double tol, const std::vector<double>& x,
                const std::vector<double>& y, double lo, double hi) {
  FitRow r;
  r.name = name;
  r.formula = formula;
  r.predicted = predicted;
  r.rule = rule;
  r.tolerance = tol;
  r.window_lo = lo;
  r.window_hi = hi;
  try {
    const PowerFit f = fit_power_law(x, y, lo, hi);
    r.measured = f.exponent;
    r.r_squared = f.r_squared;
    r.points = f.points;
  } catch (const std::domain_error&) {
    r.measured = kNaN;
    return r;
  }
  if (rule == "relative") {
    r.passed = std::abs(r.measured - predicted) <= tol * predicted;
  } else if (rule == "absolute") {
    r.passed = std::abs(r.measured - predicted) <= tol;
  } else {
    r.passed = r.measured >= tol * predicted;
  }
  return r;
}

int cut_row_of(const SupersonicField& f) {
  int cut = 0;
  while (cut < static_cast<int>(f.phi.size()) && f.phi[cut] < f.eps_cut) ++cut;
  return cut;
}

bool has_supersonic_region(const SupersonicField& f) {
  return std::any_of(f.Q.data().begin(), f.Q.data().end(), [](double v) { return v < 0.0; });
}

json matching_json(const MatchingReport& r) {
  return {{"qphi_minus", r.qphi_minus},
          {"qphi_plus", r.qphi_plus},
          {"qphi_gap", r.qphi_gap},
          {"qpsi_sonic", r.qpsi_sonic},
          {"mass_mismatch", r.mass_mismatch}};
}

json sonic_json(const SonicDiagnostics& d) {
  return {{"points", d.points.size()},
          {"exceptional_fraction", d.exceptional_fraction},
          {"max_qpsi", d.max_qpsi},
          {"segments", {{"S-", d.minus.size()}, {"Se", d.exceptional.size()}, {"S+", d.plus.size()}}},
          {"exceptional_contiguous", d.exceptional_contiguous},
          {"order_consistent", d.order_consistent}};
}

json sonic_points_json(const SonicDiagnostics& d) {
  json pts = json::array();
  for (const SonicPoint& p : d.points) {
    pts.push_back({{"phi", p.phi},
                   {"psi", p.psi},
                   {"qpsi", p.qpsi},
                   {"error", p.error},
                   {"tolerance", p.tolerance},
                   {"exceptional", p.exceptional},
                   {"segment", segment_name(p.segment)}});
  }
  return pts;
}

json curvature_json(const CurvatureReport& c) {
  json j = {{"vacuous", c.vacuous}, {"passed", c.passed}, {"note", c.note}};
  if (!c.vacuous) {
    j["x1"] = c.x1;
    j["x_star"] = c.x_star;
    j["min_d2f"] = c.min_d2f;
  }
  return j;
}

json drift_json(const DriftReport& d) {
  json paths = json::array();
  for (const PathDrift& p : d.paths) {
    paths.push_back({{"phi0", p.start.phi},
                     {"psi0", p.start.psi},
                     {"family", p.start.family == Family::plus ? "plus" : "minus"},
                     {"drift", p.drift},
                     {"relative", p.relative},
                     {"bounces", p.bounces},
                     {"samples", p.samples}});
  }
  return {{"max_drift", d.max_drift}, {"max_relative", d.max_relative}, {"paths", paths}};
}

json subsonic_residuals(const SubsonicField& f) {
  return {{"outer_iterations", f.outer_iterations},
          {"outer_history", f.outer_history},
          {"newton_iterations", f.newton_iterations},
          {"residual", f.residual},
          {"excursion", f.excursion},
          {"flux_balance", f.flux_balance}};
}

json supersonic_residuals(const SupersonicField& f) {
  return {{"outer_iterations", f.outer_iterations},
          {"outer_history", f.outer_history},
          {"inner_iterations", f.inner_iterations},
          {"contraction_history", f.contraction_history}};
}

// Characteristics from every sonic point; returns the coincident count.
int check_characteristics(const PotentialField& pf, const GasModel& gas,
                          const SonicDiagnostics& diag, double& lipschitz) {
  int coincident = 0;
  lipschitz = 0.0;
  for (const SonicPoint& p : diag.points) {
    const SonicCharacteristics c = characteristics_from_sonic(pf, gas, p);
    if (c.coincident) ++coincident;
    lipschitz = std::max(lipschitz, c.lipschitz);
  }
  return coincident;
}

double sub_difference(const SubsonicField& coarse, const SubsonicField& fine) {
  auto scaled = [](const std::vector<double>& v, double s) {
    std::vector<double> out(v);
    for (double& x : out) x /= s;
    return out;
  };
  const std::vector<double> sf = scaled(fine.phi, std::abs(fine.phi.front()));
  const std::vector<double> tf = scaled(fine.psi, fine.psi.back());
  const GridInterpolator gi(sf, tf, fine.q);
  const double zc = std::abs(coarse.phi.front()), mc = coarse.psi.back();
  double d = 0.0;
  for (size_t i = 0; i < coarse.phi.size(); ++i) {
    for (size_t j = 0; j < coarse.psi.size(); ++j) {
      const double v = gi(coarse.phi[i] / zc, coarse.psi[j] / mc);
      d = std::max(d, std::abs(coarse.q(static_cast<int>(i), static_cast<int>(j)) - v));
    }
  }
  return d;
}

double sup_difference(const SupersonicField& coarse, const SupersonicField& fine) {
  const int cf = cut_row_of(fine), cc = cut_row_of(coarse);
  std::vector<double> sf;
  for (size_t i = cf; i < fine.phi.size(); ++i) sf.push_back(fine.phi[i] / fine.zeta_plus);
  std::vector<double> tf(fine.psi);
  for (double& t : tf) t /= fine.psi.back();
  Field2D Qf(static_cast<int>(sf.size()), fine.Q.n1());
  for (int i = 0; i < Qf.n0(); ++i) {
    for (int j = 0; j < Qf.n1(); ++j) Qf(i, j) = fine.Q(cf + i, j);
  }
  const GridInterpolator gi(sf, tf, Qf);
  double d = 0.0;
  for (size_t i = cc; i < coarse.phi.size(); ++i) {
    for (size_t j = 0; j < coarse.psi.size(); ++j) {
      const double v = gi(coarse.phi[i] / coarse.zeta_plus, coarse.psi[j] / coarse.psi.back());
      d = std::max(d, std::abs(coarse.Q(static_cast<int>(i), static_cast<int>(j)) - v));
    }
  }
  return d;
}

void check_admissible(const RunConfig& cfg, const NozzleSpec& spec, json& report) {
  const AdmissibilityReport rep = validate(spec, cfg.nozzle.length_warning);
  json conds = json::array();
  std::string failed;
  for (const ConditionResult& c : rep.conditions) {
    conds.push_back({{"name", c.name}, {"passed", c.passed}, {"worst_x", c.worst_x},
                     {"worst_value", c.worst_value}, {"note", c.note}});
    if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
  }
  report["admissibility"] = {{"conditions", conds}, {"warnings", rep.warnings}};
  // The straight channel sits outside the curvature envelope by construction
  // and is kept as an exact fixture.
  if (!rep.passed() && cfg.nozzle.delta > 0.0) {
    throw AdmissibilityError("nozzle fails admissibility: " + failed);
  }
}

}  // namespace

std::vector<FitRow> fit_report(const SubsonicField* sub, const SupersonicField* sup,
                               const NozzleSpec& spec, const GasModel& gas, double lo, double hi) {
  std::vector<FitRow> rows;
  if (sub) {
    const double z = std::abs(sub->phi.front());
    const double psi_mid = 0.5 * sub->psi.back();
    std::vector<double> x, y;
    for (size_t i = 0; i + 1 < sub->phi.size(); ++i) {
      std::vector<double> col(sub->psi.size());
      for (size_t j = 0; j < col.size(); ++j) col[j] = sub->offset(static_cast<int>(i), static_cast<int>(j));
      x.push_back(-sub->phi[i]);
      y.push_back(linear_interp(sub->psi, col, psi_mid));
    }
    const double l = spec.lambda_minus;
    rows.push_back(make_row("subsonic_offset", "lambda_minus/2+1", l / 2 + 1, "relative", 0.1, x, y,
                            lo * z, hi * z));
  }
  if (sup) {
    const double z = sup->zeta_plus;
    const int cut = cut_row_of(*sup);
    std::vector<double> x, q, qphi, qpsi, h;
    for (size_t i = std::max(cut, 1); i < sup->phi.size(); ++i) {
      const int ii = static_cast<int>(i);
      double a = 0.0, b = 0.0, c = 0.0;
      for (size_t j = 0; j < sup->psi.size(); ++j) {
        const int jj = static_cast<int>(j);
        const double Q = sup->Q(ii, jj);
        a = std::max(a, -Q);
        b = std::max(b, std::abs(0.5 * (sup->W(ii, jj) - sup->Z(ii, jj))));
        if (Q < 0.0) {
          const double sb = gas.supersonic_state(Q).sqrt_b;
          c = std::max(c, std::abs(0.5 * (sup->W(ii, jj) + sup->Z(ii, jj)) / sb));
        }
      }
      x.push_back(sup->phi[i]);
      q.push_back(a);
      qphi.push_back(b);
      qpsi.push_back(c);
      h.push_back(sup->h[i]);
    }
    const double l = spec.lambda_plus;
    rows.push_back(make_row("supersonic_Q", "lambda_plus+2", l + 2, "absolute", 0.5, x, q, lo * z, hi * z));
    rows.push_back(make_row("supersonic_Q_phi", "lambda_plus+1", l + 1, "absolute", 0.6, x, qphi, lo * z, hi * z));
    rows.push_back(make_row("supersonic_Q_psi", "3*lambda_plus/2+1", 1.5 * l + 1, "lower_bound", 0.9, x, qpsi,
                            lo * z, hi * z));
    rows.push_back(make_row("wall_source_h", "5*lambda_plus/4+1/2", 1.25 * l + 0.5, "relative", 0.1, x, h,
                            lo * z, hi * z));
  }
  return rows;
}

json fit_rows_json(const std::vector<FitRow>& rows) {
  json out = json::array();
  for (const FitRow& r : rows) {
    out.push_back({{"name", r.name},
                   {"formula", r.formula},
                   {"predicted", r.predicted},
                   {"measured", std::isfinite(r.measured) ? json(r.measured) : json(nullptr)},
                   {"r_squared", r.r_squared},
                   {"points", r.points},
                   {"rule", r.rule},
                   {"tolerance", r.tolerance},
                   {"window", {r.window_lo, r.window_hi}},
                   {"passed", r.passed}});
  }
  return out;
}

TransonicRun solve_transonic(const RunConfig& cfg, const GasModel& gas) {
  const NozzleSpec spec = make_spec(cfg);
  TransonicRun run;
  run.sub = subsonic_fixed_point(spec, gas, cfg.subsonic, subsonic_seed_speed(cfg, gas));
  run.sup = supersonic_fixed_point(spec, gas, cfg.supersonic);
  run.sol = connect(&run.sub, &run.sup, gas, cfg.mass_tol);
  reconstruct_theta(run.sol, gas);
  to_physical(run.sol, gas);
  run.closure = physical_closure(run.sol, spec, gas, cfg.stations);
  const PotentialField pf = combined_field(run.sol);
  run.sonic = classify_sonic_points(pf, gas);
  run.coincident = check_characteristics(pf, gas, run.sonic, run.lipschitz);
  if (has_supersonic_region(run.sup)) {
    run.drift = riemann_invariant_drift(run.sup, run.sol.sup, gas,
                                        default_drift_starts(run.sup, cfg.drift_paths));
  }
  const BoundaryMaps& mm = run.sub.maps;
  const BoundaryMaps& mp = run.sup.maps;
  auto wall_x = [&](double phi) { return phi >= 0.0 ? mp.X_plus(phi) : mm.X_minus(phi); };
  run.curvature = wall_curvature_check(spec, run.sonic, pf, gas, wall_x);
  return run;
}

json transonic_diagnostics(const TransonicRun& run) {
  json stations = json::array();
  for (size_t k = 0; k < run.closure.station_x.size(); ++k) {
    stations.push_back({{"x", run.closure.station_x[k]}, {"flux", run.closure.station_flux[k]}});
  }
  json sonic = sonic_json(run.sonic);
  sonic["coincident"] = run.coincident;
  sonic["lipschitz_max"] = run.lipschitz;
  sonic["points_detail"] = sonic_points_json(run.sonic);
  return {{"matching", matching_json(run.sol.matching)},
          {"curl_residual", run.sol.curl_residual},
          {"mass", {{"m", run.sup.m}, {"m_in", run.sub.m_in},
                    {"relative_mismatch", std::abs(run.sub.m_in - run.sup.m) / run.sup.m}}},
          {"closure", {{"wall_error", run.closure.wall_error},
                       {"wall_angle_error", run.closure.wall_angle_error},
                       {"flux_drift", run.closure.flux_drift},
                       {"stations", stations}}},
          {"sonic", sonic},
          {"drift", drift_json(run.drift)},
          {"curvature", curvature_json(run.curvature)}};
}

RunConfig refined_config(const RunConfig& cfg, int k) {
  RunConfig c = cfg;
  const int f = 1 << k;
  c.subsonic.n_phi *= f;
  c.subsonic.n_psi *= f;
  c.subsonic.wall_samples *= f;
  c.subsonic.inlet_samples *= f;
  c.supersonic.n_psi *= f;
  c.supersonic.wall_samples *= f;
  c.supersonic.eps_fraction /= f;
  if (c.supersonic.phi_ratio > 0.0) c.supersonic.phi_ratio = std::pow(c.supersonic.phi_ratio, 1.0 / f);
  return c;
}

ConvergenceTable convergence_study(const RunConfig& cfg, int levels) {
  if (levels < 3) throw ConfigError("convergence study needs at least 3 levels");
  const GasModel gas(cfg.gamma);
  const NozzleSpec spec = make_spec(cfg);
  ConvergenceTable t;
  t.study = cfg.study;
  const bool want_sub = cfg.study != RunMode::supersonic;
  const bool want_sup = cfg.study != RunMode::subsonic;
  std::vector<SubsonicField> subs;
  std::vector<SupersonicField> sups;
  for (int k = 0; k < levels; ++k) {
    const RunConfig c = refined_config(cfg, k);
    LevelResult L;
    L.sub_n_phi = c.subsonic.n_phi;
    L.sub_n_psi = c.subsonic.n_psi;
    L.sup_n_psi = c.supersonic.n_psi;
    L.eps_fraction = c.supersonic.eps_fraction;
    L.phi_ratio = effective_phi_ratio(c.supersonic);
    if (cfg.study == RunMode::transonic) {
      TransonicRun run = solve_transonic(c, gas);
      const MatchingReport& m = run.sol.matching;
      L.qphi_minus = m.qphi_minus;
      L.qphi_plus = m.qphi_plus;
      L.qphi_gap = m.qphi_gap;
      L.qpsi_sonic = run.sonic.max_qpsi;
      L.exceptional_fraction = run.sonic.exceptional_fraction;
      L.drift = run.drift.max_relative;
      L.curl = run.sol.curl_residual;
      L.wall_error = run.closure.wall_error;
      L.flux_drift = run.closure.flux_drift;
      L.mass_mismatch = m.mass_mismatch;
      subs.push_back(std::move(run.sub));
      sups.push_back(std::move(run.sup));
    } else if (want_sub) {
      subs.push_back(subsonic_fixed_point(spec, gas, c.subsonic, subsonic_seed_speed(c, gas)));
      L.mass_mismatch = std::abs(subs.back().m_in - subs.back().m) / subs.back().m;
    } else {
      sups.push_back(supersonic_fixed_point(spec, gas, c.supersonic));
    }
    t.levels.push_back(L);
  }
  double worst = 0.0;
  for (int k = 0; k + 1 < levels; ++k) {
    if (want_sub) {
      t.diff_sub.push_back(sub_difference(subs[k], subs[k + 1]));
      worst = std::max(worst, t.diff_sub.back());
    }
    if (want_sup) {
      t.diff_sup.push_back(sup_difference(sups[k], sups[k + 1]));
      worst = std::max(worst, t.diff_sup.back());
    }
  }
  t.exact = worst <= 1e-13;
  t.order_sub = observed_orders(t.diff_sub);
  t.order_sup = observed_orders(t.diff_sup);
  auto all_ge1 = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double p) { return p >= 1.0; });
  };
  t.passed = t.exact || (all_ge1(t.order_sub) && all_ge1(t.order_sup));
  return t;
}

json convergence_json(const ConvergenceTable& t) {
  json levels = json::array();
  for (const LevelResult& L : t.levels) {
    levels.push_back({{"sub_n_phi", L.sub_n_phi},
                      {"sub_n_psi", L.sub_n_psi},
                      {"sup_n_psi", L.sup_n_psi},
                      {"eps_fraction", L.eps_fraction},
                      {"phi_ratio", L.phi_ratio},
                      {"qphi_minus", L.qphi_minus},
                      {"qphi_plus", L.qphi_plus},
                      {"qphi_gap", L.qphi_gap},
                      {"qpsi_sonic", L.qpsi_sonic},
                      {"exceptional_fraction", L.exceptional_fraction},
                      {"drift", L.drift},
                      {"curl", L.curl},
                      {"wall_error", L.wall_error},
                      {"flux_drift", L.flux_drift},
                      {"mass_mismatch", L.mass_mismatch}});
  }
  auto orders = [&](const std::vector<double>& v) {
    if (t.exact) return json("exact");
    json a = json::array();
    for (double p : v) a.push_back(std::isfinite(p) ? json(p) : json("exact"));
    return a;
  };
  return {{"study", mode_name(t.study)},
          {"levels", levels},
          {"diff_sub", t.diff_sub},
          {"diff_sup", t.diff_sup},
          {"order_sub", orders(t.order_sub)},
          {"order_sup", orders(t.order_sup)},
          {"exact", t.exact},
          {"passed", t.passed}};
}

json analyze_field(const PotentialField& field, const GasModel& gas) {
  const SonicDiagnostics diag = classify_sonic_points(field, gas);
  double lipschitz = 0.0;
  const int coincident = check_characteristics(field, gas, diag, lipschitz);
  json sonic = sonic_json(diag);
  sonic["coincident"] = coincident;
  sonic["lipschitz_max"] = lipschitz;
  sonic["points_detail"] = sonic_points_json(diag);
  json curvature;
  if (diag.plus.empty()) {
    CurvatureReport c;
    c.vacuous = true;
    c.note = "no S+ segment: the sonic line carries no negative characteristic to the wall";
    curvature = curvature_json(c);
  } else {
    curvature = {{"vacuous", false}, {"passed", nullptr},
                 {"note", "imported field has no wall map; curvature footprint not evaluated"}};
  }
  return {{"grid", {{"n_phi", field.phi.size()}, {"n_psi", field.psi.size()}}},
          {"sonic", sonic},
          {"curvature", curvature}};
}

std::string make_run_directory(const std::string& base, RunMode mode) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  const std::string stem = std::string("run-") + stamp + "-" + mode_name(mode);
  fs::path dir = fs::path(base) / stem;
  for (int k = 2; fs::exists(dir); ++k) dir = fs::path(base) / (stem + "-" + std::to_string(k));
  fs::create_directories(dir);
  return dir.string();
}

json run_pipeline(const RunConfig& cfg, const std::string& dir, bool dump) {
  fs::create_directories(dir);
  std::vector<std::string> files;
  auto put = [&](const std::string& name, const std::string& text) {
    write_text((fs::path(dir) / name).string(), text);
    files.push_back(name);
  };
  auto put_json = [&](const std::string& name, const json& j) { put(name, j.dump(2) + "\n"); };

  const GasModel gas(cfg.gamma);
  json report = {{"mode", mode_name(cfg.mode)}};
  put_json("config.json", config_to_json(cfg));

  RunConfig c = cfg;
  if (dump) {
    fs::create_directories(fs::path(dir) / "iterations");
    c.subsonic.observer = [&](int it, const SubsonicField& f) {
      char name[64];
      std::snprintf(name, sizeof name, "iterations/subsonic_%04d", it);
      put(std::string(name) + ".csv", subsonic_csv(f));
      put_json(std::string(name) + ".json", {{"iteration", it}, {"outer_history", f.outer_history}});
    };
    c.supersonic.observer = [&](int it, const SupersonicField& f) {
      char name[64];
      std::snprintf(name, sizeof name, "iterations/supersonic_%04d", it);
      put(std::string(name) + ".csv", supersonic_csv(f));
      put_json(std::string(name) + ".json", {{"iteration", it},
                                             {"outer_history", f.outer_history},
                                             {"inner_iterations", f.inner_iterations}});
    };
  }

  if (cfg.mode == RunMode::analyze) {
    const PotentialField field = read_potential_csv(cfg.field);
    const json diag = analyze_field(field, gas);
    put_json("diagnostics.json", diag);
    report["diagnostics"] = diag;
    report["field"] = cfg.field;
  } else {
    const NozzleSpec spec = make_spec(cfg);
    check_admissible(cfg, spec, report);
    report["m"] = mass_flux(spec, gas);
    if (cfg.mode == RunMode::subsonic) {
      const SubsonicField sub = subsonic_fixed_point(spec, gas, c.subsonic, subsonic_seed_speed(c, gas));
      put("subsonic.csv", subsonic_csv(sub));
      put_json("residuals.json", {{"subsonic", subsonic_residuals(sub)}});
      const json fits = fit_rows_json(fit_report(&sub, nullptr, spec, gas, cfg.fit_lo, cfg.fit_hi));
      put_json("fits.json", fits);
      report["fits"] = fits;
      report["m_in"] = sub.m_in;
      report["mass_mismatch"] = std::abs(sub.m_in - sub.m) / sub.m;
      report["zeta_minus"] = sub.zeta_minus;
    } else if (cfg.mode == RunMode::supersonic) {
      const SupersonicField sup = supersonic_fixed_point(spec, gas, c.supersonic);
      put("supersonic.csv", supersonic_csv(sup));
      put_json("residuals.json", {{"supersonic", supersonic_residuals(sup)}});
      const json fits = fit_rows_json(fit_report(nullptr, &sup, spec, gas, cfg.fit_lo, cfg.fit_hi));
      put_json("fits.json", fits);
      report["fits"] = fits;
      report["zeta_plus"] = sup.zeta_plus;
      report["eps_cut"] = sup.eps_cut;
    } else if (cfg.mode == RunMode::transonic) {
      const TransonicRun run = solve_transonic(c, gas);
      put("subsonic.csv", subsonic_csv(run.sub));
      put("supersonic.csv", supersonic_csv(run.sup));
      put("transonic.csv", transonic_csv(run.sol));
      put("potential.csv", potential_csv(combined_field(run.sol)));
      put("subsonic.vtk", block_vtk(run.sol.sub, "subsonic block"));
      put("supersonic.vtk", block_vtk(run.sol.sup, "supersonic block"));
      put_json("residuals.json", {{"subsonic", subsonic_residuals(run.sub)},
                                  {"supersonic", supersonic_residuals(run.sup)}});
      const json diag = transonic_diagnostics(run);
      put_json("diagnostics.json", diag);
      const json fits = fit_rows_json(fit_report(&run.sub, &run.sup, spec, gas, cfg.fit_lo, cfg.fit_hi));
      put_json("fits.json", fits);
      report["fits"] = fits;
      report["zeta_minus"] = run.sub.zeta_minus;
      report["zeta_plus"] = run.sup.zeta_plus;
      report["matching"] = diag["matching"];
      report["closure"] = {{"wall_error", run.closure.wall_error},
                           {"flux_drift", run.closure.flux_drift}};
      report["sonic"] = {{"exceptional_fraction", run.sonic.exceptional_fraction},
                         {"max_qpsi", run.sonic.max_qpsi}};
      report["drift_max_relative"] = run.drift.max_relative;
    } else {
      const ConvergenceTable t = convergence_study(c, cfg.levels);
      const json tj = convergence_json(t);
      put_json("convergence.json", tj);
      std::string csv = "level,sub_n_phi,sub_n_psi,sup_n_psi,diff_sub,diff_sup,qphi_gap,qpsi_sonic,drift\n";
      for (size_t k = 0; k < t.levels.size(); ++k) {
        const LevelResult& L = t.levels[k];
        auto at = [&](const std::vector<double>& v) {
          return k > 0 && k - 1 < v.size() ? format_number(v[k - 1]) : std::string("nan");
        };
        csv += std::to_string(k) + "," + std::to_string(L.sub_n_phi) + "," + std::to_string(L.sub_n_psi) +
               "," + std::to_string(L.sup_n_psi) + "," + at(t.diff_sub) + "," + at(t.diff_sup) + "," +
               format_number(L.qphi_gap) + "," + format_number(L.qpsi_sonic) + "," +
               format_number(L.drift) + "\n";
      }
      put("convergence.csv", csv);
      report["convergence"] = {{"passed", t.passed}, {"exact", t.exact},
                               {"order_sub", tj["order_sub"]}, {"order_sup", tj["order_sup"]}};
    }
  }
  put_json("report.json", report);

  std::sort(files.begin(), files.end());
  json entries = json::array();
  for (const std::string& f : files) {
    const fs::path p = fs::path(dir) / f;
    entries.push_back({{"name", f}, {"bytes", fs::file_size(p)}, {"fnv1a64", file_digest(p.string())}});
  }
  write_json((fs::path(dir) / "manifest.json").string(), {{"mode", mode_name(cfg.mode)}, {"files", entries}});
  return report;
}

}  // namespace laval
