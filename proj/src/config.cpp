#include "laval/config.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "laval/errors.h"

namespace laval {
namespace {

class Reader {
 public:
  Reader(const toml::table& root, std::string source) : root_(root), source_(std::move(source)) {}

  const toml::table* section(const std::string& name) {
    sections_.insert(name);
    const toml::node* n = root_.get(name);
    if (!n) return nullptr;
    if (!n->is_table()) fail(name, "must be a table");
    current_ = name;
    keys_.clear();
    return n->as_table();
  }

  void number(const toml::table* t, const char* key, double& out) {
    keys_.insert(key);
    if (!t) return;
    const toml::node* n = t->get(key);
    if (!n) return;
    if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer())) {
      out = *v;
      return;
    }
    fail(std::string(key), "must be a number");
  }

  void integer(const toml::table* t, const char* key, int& out) {
    keys_.insert(key);
    if (!t) return;
    const toml::node* n = t->get(key);
    if (!n) return;
    if (!n->is_integer()) fail(key, "must be an integer");
    const int64_t v = n->as_integer()->get();
    if (v < -1000000000 || v > 1000000000) fail(key, "is out of range");
    out = static_cast<int>(v);
  }

  void boolean(const toml::table* t, const char* key, bool& out) {
    keys_.insert(key);
    if (!t) return;
    const toml::node* n = t->get(key);
    if (!n) return;
    if (!n->is_boolean()) fail(key, "must be a boolean");
    out = n->as_boolean()->get();
  }

  void string(const toml::table* t, const char* key, std::string& out) {
    keys_.insert(key);
    if (!t) return;
    const toml::node* n = t->get(key);
    if (!n) return;
    if (!n->is_string()) fail(key, "must be a string");
    out = n->as_string()->get();
  }

  // Rejects keys that were not read from the current section.
  void finish(const toml::table* t) {
    if (!t) return;
    for (const auto& [k, v] : *t) {
      if (!keys_.count(std::string(k.str()))) fail(std::string(k.str()), "is not a known key");
    }
  }

  void finish_root() {
    for (const auto& [k, v] : root_) {
      if (!sections_.count(std::string(k.str()))) {
        throw ConfigError(source_ + ": unknown section [" + std::string(k.str()) + "]");
      }
    }
  }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(source_ + ": " + current_ + "." + key + " " + what);
  }

  const toml::table& root_;
  std::string source_;
  std::string current_;
  std::set<std::string> keys_, sections_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

const char* mode_name(RunMode m) {
  switch (m) {
    case RunMode::subsonic: return "subsonic";
    case RunMode::supersonic: return "supersonic";
    case RunMode::transonic: return "transonic";
    case RunMode::analyze: return "analyze";
    case RunMode::convergence: return "convergence";
  }
  return "?";
}

RunMode parse_mode(const std::string& s) {
  for (RunMode m : {RunMode::subsonic, RunMode::supersonic, RunMode::transonic, RunMode::analyze,
                    RunMode::convergence}) {
    if (s == mode_name(m)) return m;
  }
  throw ConfigError("mode must be one of subsonic, supersonic, transonic, analyze, convergence; got '" +
                    s + "'");
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ":" << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  RunConfig c;
  Reader r(root, source);

  const toml::table* t = r.section("gas");
  r.number(t, "gamma", c.gamma);
  r.finish(t);

  t = r.section("nozzle");
  r.number(t, "l_minus", c.nozzle.l_minus);
  r.number(t, "l_plus", c.nozzle.l_plus);
  r.number(t, "f0", c.nozzle.f0);
  r.number(t, "lambda_minus", c.nozzle.lambda_minus);
  r.number(t, "lambda_plus", c.nozzle.lambda_plus);
  r.number(t, "delta", c.nozzle.delta);
  r.number(t, "length_warning", c.nozzle.length_warning);
  r.finish(t);

  SubsonicOptions& so = c.subsonic;
  t = r.section("subsonic");
  r.integer(t, "n_phi", so.n_phi);
  r.integer(t, "n_psi", so.n_psi);
  r.number(t, "grading_ratio", so.grading_ratio);
  r.number(t, "max_stretch", so.max_stretch);
  r.number(t, "tol_inner", so.tol_inner);
  r.integer(t, "max_newton", so.max_newton);
  r.number(t, "excursion_tol", so.excursion_tol);
  r.number(t, "tol_outer", so.tol_outer);
  r.integer(t, "max_outer", so.max_outer);
  r.number(t, "damping", so.damping);
  r.number(t, "continuation_gap", so.continuation_gap);
  r.integer(t, "wall_samples", so.wall_samples);
  r.integer(t, "inlet_samples", so.inlet_samples);
  r.number(t, "seed_c2", c.subsonic_seed_c2);
  r.finish(t);

  SupersonicOptions& po = c.supersonic;
  t = r.section("supersonic");
  r.integer(t, "n_psi", po.n_psi);
  r.number(t, "phi_ratio", po.phi_ratio);
  r.number(t, "eps_fraction", po.eps_fraction);
  r.number(t, "cfl", po.cfl);
  r.number(t, "tol_contraction", po.tol_contraction);
  r.integer(t, "max_contraction", po.max_contraction);
  r.number(t, "tol_outer", po.tol_outer);
  r.integer(t, "max_outer", po.max_outer);
  r.number(t, "damping", po.damping);
  r.integer(t, "wall_samples", po.wall_samples);
  r.boolean(t, "sources", po.sources);
  r.number(t, "seed_scale", po.seed_scale);
  r.finish(t);

  t = r.section("run");
  std::string mode = mode_name(c.mode), study = mode_name(c.study);
  r.string(t, "mode", mode);
  r.string(t, "output", c.output);
  r.string(t, "field", c.field);
  r.integer(t, "levels", c.levels);
  r.string(t, "study", study);
  r.number(t, "fit_lo", c.fit_lo);
  r.number(t, "fit_hi", c.fit_hi);
  r.number(t, "mass_tol", c.mass_tol);
  r.integer(t, "stations", c.stations);
  r.integer(t, "drift_paths", c.drift_paths);
  r.finish(t);
  r.finish_root();
  c.mode = parse_mode(mode);
  c.study = parse_mode(study);

  validate_config(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void validate_config(const RunConfig& c) {
  auto positive = [](double v, const char* name) {
    require(std::isfinite(v) && v > 0.0, std::string(name) + " must be > 0");
  };
  require(std::isfinite(c.gamma) && c.gamma > 1.0, "gas.gamma must exceed 1");
  const NozzleConfig& n = c.nozzle;
  require(n.l_minus < 0.0, "nozzle.l_minus must be < 0");
  require(n.l_plus > 0.0, "nozzle.l_plus must be > 0");
  positive(n.f0, "nozzle.f0");
  require(n.lambda_minus > 2.0 && n.lambda_plus > 2.0, "nozzle.lambda_minus and lambda_plus must exceed 2");
  require(std::isfinite(n.delta) && n.delta >= 0.0, "nozzle.delta must be >= 0");
  positive(n.length_warning, "nozzle.length_warning");

  const SubsonicOptions& s = c.subsonic;
  require(s.n_phi >= 8 && s.n_psi >= 8, "subsonic grid sizes must be >= 8");
  require(s.grading_ratio >= 1.0, "subsonic.grading_ratio must be >= 1");
  require(s.max_stretch >= 1.0, "subsonic.max_stretch must be >= 1");
  positive(s.tol_inner, "subsonic.tol_inner");
  positive(s.excursion_tol, "subsonic.excursion_tol");
  positive(s.tol_outer, "subsonic.tol_outer");
  positive(s.continuation_gap, "subsonic.continuation_gap");
  require(s.max_newton >= 1 && s.max_outer >= 1, "subsonic iteration caps must be >= 1");
  require(s.damping > 0.0 && s.damping <= 1.0, "subsonic.damping must lie in (0, 1]");
  require(s.wall_samples >= 0 && s.inlet_samples >= 0, "subsonic sample counts must be >= 0");
  require(std::isfinite(c.subsonic_seed_c2) && c.subsonic_seed_c2 >= 0.0, "subsonic.seed_c2 must be >= 0");

  const SupersonicOptions& p = c.supersonic;
  require(p.n_psi >= 8, "supersonic grid sizes must be >= 8");
  require(p.phi_ratio == 0.0 || p.phi_ratio > 1.0, "supersonic.phi_ratio must be 0 (automatic) or > 1");
  require(p.eps_fraction > 0.0 && p.eps_fraction < 0.5, "supersonic.eps_fraction must lie in (0, 0.5)");
  require(p.cfl > 0.0 && p.cfl <= 1.0, "supersonic.cfl must lie in (0, 1]");
  positive(p.tol_contraction, "supersonic.tol_contraction");
  positive(p.tol_outer, "supersonic.tol_outer");
  require(p.max_contraction >= 1 && p.max_outer >= 1, "supersonic iteration caps must be >= 1");
  require(p.damping > 0.0 && p.damping <= 1.0, "supersonic.damping must lie in (0, 1]");
  require(p.wall_samples >= 0, "supersonic.wall_samples must be >= 0");
  positive(p.seed_scale, "supersonic.seed_scale");

  require(!c.output.empty(), "run.output must not be empty");
  require(c.mode != RunMode::analyze || !c.field.empty(), "run.field is required in analyze mode");
  require(c.levels >= 3, "run.levels must be >= 3");
  require(c.study == RunMode::subsonic || c.study == RunMode::supersonic ||
              c.study == RunMode::transonic,
          "run.study must be subsonic, supersonic or transonic");
  require(c.fit_lo > 0.0 && c.fit_lo < c.fit_hi && c.fit_hi <= 1.0,
          "run fit window must satisfy 0 < fit_lo < fit_hi <= 1");
  positive(c.mass_tol, "run.mass_tol");
  require(c.stations >= 1, "run.stations must be >= 1");
  require(c.drift_paths >= 1, "run.drift_paths must be >= 1");
}

NozzleSpec make_spec(const RunConfig& c) {
  const NozzleConfig& n = c.nozzle;
  return default_wall(n.l_minus, n.l_plus, n.f0, n.lambda_minus, n.lambda_plus, n.delta);
}

double subsonic_seed_speed(const RunConfig& c, const GasModel& gas) {
  const double e = c.nozzle.lambda_minus / 2.0 + 1.0;
  const double v = gas.c_star() - c.subsonic_seed_c2 * std::pow(std::abs(c.nozzle.l_minus), e);
  if (!(v > 0.0)) throw ConfigError("subsonic.seed_c2 gives a non-positive seed speed");
  return v;
}

nlohmann::json config_to_json(const RunConfig& c) {
  using nlohmann::json;
  const SubsonicOptions& s = c.subsonic;
  const SupersonicOptions& p = c.supersonic;
  json j;
  j["gas"] = {{"gamma", c.gamma}};
  j["nozzle"] = {{"l_minus", c.nozzle.l_minus},       {"l_plus", c.nozzle.l_plus},
                 {"f0", c.nozzle.f0},                 {"lambda_minus", c.nozzle.lambda_minus},
                 {"lambda_plus", c.nozzle.lambda_plus}, {"delta", c.nozzle.delta},
                 {"length_warning", c.nozzle.length_warning}};
  j["subsonic"] = {{"n_phi", s.n_phi},
                   {"n_psi", s.n_psi},
                   {"grading_ratio", s.grading_ratio},
                   {"max_stretch", s.max_stretch},
                   {"tol_inner", s.tol_inner},
                   {"max_newton", s.max_newton},
                   {"excursion_tol", s.excursion_tol},
                   {"tol_outer", s.tol_outer},
                   {"max_outer", s.max_outer},
                   {"damping", s.damping},
                   {"continuation_gap", s.continuation_gap},
                   {"wall_samples", s.wall_samples},
                   {"inlet_samples", s.inlet_samples},
                   {"seed_c2", c.subsonic_seed_c2}};
  j["supersonic"] = {{"n_psi", p.n_psi},
                     {"phi_ratio", p.phi_ratio},
                     {"effective_phi_ratio", effective_phi_ratio(p)},
                     {"eps_fraction", p.eps_fraction},
                     {"cfl", p.cfl},
                     {"tol_contraction", p.tol_contraction},
                     {"max_contraction", p.max_contraction},
                     {"tol_outer", p.tol_outer},
                     {"max_outer", p.max_outer},
                     {"damping", p.damping},
                     {"wall_samples", p.wall_samples},
                     {"sources", p.sources},
                     {"seed_scale", p.seed_scale}};
  j["run"] = {{"mode", mode_name(c.mode)}, {"output", c.output},     {"field", c.field},
              {"levels", c.levels},        {"study", mode_name(c.study)}, {"fit_lo", c.fit_lo},
              {"fit_hi", c.fit_hi},        {"mass_tol", c.mass_tol}, {"stations", c.stations},
              {"drift_paths", c.drift_paths}};
  return j;
}

}  // namespace laval
