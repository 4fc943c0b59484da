#pragma once

#include <string>

#include <json.hpp>

#include "laval/nozzle.h"
#include "laval/subsonic.h"
#include "laval/supersonic.h"

namespace laval {

enum class RunMode { subsonic, supersonic, transonic, analyze, convergence };

const char* mode_name(RunMode m);
RunMode parse_mode(const std::string& s);  // throws ConfigError

struct NozzleConfig {
  double l_minus = -0.3;
  double l_plus = 0.3;
  double f0 = 1.0;
  double lambda_minus = 3.0;
  double lambda_plus = 3.0;
  double delta = 0.1;  // 0 gives the straight channel
  double length_warning = 0.5;
};

struct RunConfig {
  double gamma = 1.4;
  NozzleConfig nozzle;
  SubsonicOptions subsonic;
  double subsonic_seed_c2 = 0.0;  // seed speed c* - c2 |l_minus|^(lambda_minus/2 + 1)
  SupersonicOptions supersonic;
  RunMode mode = RunMode::transonic;
  std::string output = "runs";
  std::string field;       // CSV input for analyze mode
  int levels = 3;          // convergence mode
  RunMode study = RunMode::transonic;  // what a convergence study refines
  double fit_lo = 1.0 / 16.0;  // fit window as fractions of |zeta|
  double fit_hi = 0.5;
  double mass_tol = 1e-6;
  int stations = 5;
  int drift_paths = 10;
};

// Parses TOML text. Unknown keys, wrong types and values failing
// validate_config raise ConfigError naming the key.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

void validate_config(const RunConfig& cfg);

NozzleSpec make_spec(const RunConfig& cfg);
double subsonic_seed_speed(const RunConfig& cfg, const GasModel& gas);

nlohmann::json config_to_json(const RunConfig& cfg);

}  // namespace laval
