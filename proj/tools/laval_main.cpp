#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "laval/config.h"
#include "laval/errors.h"
#include "laval/io.h"
#include "laval/pipeline.h"

namespace {

using nlohmann::json;

enum Exit { kOk = 0, kDiverged = 1, kInvalid = 2 };

int fail(int code, const std::string& kind, const std::string& message, json extra = json::object()) {
  json err = {{"status", "error"}, {"kind", kind}, {"message", message}, {"exit_code", code}};
  err.update(extra);
  std::cerr << err.dump(2) << "\n";
  return code;
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const laval::ConfigError& e) {
    return fail(kInvalid, "config", e.what());
  } catch (const laval::AdmissibilityError& e) {
    return fail(kInvalid, "admissibility", e.what());
  } catch (const laval::ConvergenceError& e) {
    return fail(kDiverged, "convergence", e.what(), {{"history", e.history()}});
  } catch (const laval::DomainError& e) {
    return fail(kDiverged, "domain", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kInvalid, "invalid_argument", e.what());
  } catch (const std::exception& e) {
    return fail(kDiverged, "runtime", e.what());
  }
}

int finish(const std::string& dir, const json& report) {
  json out = {{"status", "ok"}, {"run_directory", dir}};
  if (report.contains("fits")) out["fits"] = report["fits"];
  if (report.contains("convergence")) out["convergence"] = report["convergence"];
  std::cout << out.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transonic de Laval nozzle solver in the potential-stream plane"};
  app.require_subcommand(1);

  std::string config_path, mode, out_dir, field_path;
  bool dump = false;
  int levels = 3;

  CLI::App* run = app.add_subcommand("run", "Run the pipeline selected by the config (or --mode)");
  run->add_option("config", config_path, "TOML configuration")->required();
  run->add_option("--mode", mode, "subsonic, supersonic, transonic, analyze or convergence");
  run->add_option("--out", out_dir, "Base output directory (default: [run] output)");
  run->add_flag("--dump", dump, "Write per-iteration snapshots");

  CLI::App* analyze = app.add_subcommand("analyze", "Sonic-line analysis of a potential-plane field CSV");
  analyze->add_option("field", field_path, "CSV with columns phi, psi, q")->required();
  analyze->add_option("--out", out_dir, "Base output directory")->default_val("runs");
  double gamma = 1.4;
  analyze->add_option("--gamma", gamma, "Adiabatic exponent")->default_val(1.4);

  CLI::App* converge = app.add_subcommand("converge", "Grid refinement study");
  converge->add_option("config", config_path, "TOML configuration")->required();
  converge->add_option("--levels", levels, "Number of refinement levels (>= 3)")->default_val(3);
  converge->add_option("--out", out_dir, "Base output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail(kInvalid, "usage", e.what());
  }

  return guarded([&] {
    laval::RunConfig cfg;
    if (*analyze) {
      cfg.gamma = gamma;
      cfg.mode = laval::RunMode::analyze;
      cfg.field = field_path;
    } else {
      cfg = laval::load_config(config_path);
      if (*converge) {
        cfg.mode = laval::RunMode::convergence;
        cfg.levels = levels;
      } else if (!mode.empty()) {
        cfg.mode = laval::parse_mode(mode);
      }
    }
    if (!out_dir.empty()) cfg.output = out_dir;
    laval::validate_config(cfg);
    const std::string dir = laval::make_run_directory(cfg.output, cfg.mode);
    const json report = laval::run_pipeline(cfg, dir, dump);
    return finish(dir, report);
  });
}
