// qcorr: command-line front end for sweeps, rate fits, audits and scenarios.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qcorr/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quenched corridor survival laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<unsigned> workers;
  app.add_option("-c,--config", config_path, "INI run configuration");
  app.add_option("--seed", seed, "master seed (overrides the config file)");
  app.add_option("-o,--output-dir", output_dir, "output directory");
  app.add_option("-j,--workers", workers, "worker threads (0 = hardware concurrency)");

  std::optional<std::string> betas;
  std::optional<int> ensemble;
  std::optional<double> horizon;
  auto* sweep = app.add_subcommand("sweep", "estimate gamma over a beta grid");
  sweep->add_option("--betas", betas, "comma-separated beta grid");
  sweep->add_option("--ensemble", ensemble, "environments per beta");
  sweep->add_option("--horizon", horizon, "time horizon");

  std::vector<std::string> files;
  std::vector<double> fit;
  auto* rate = app.add_subcommand("rate", "fit a rate to existing curve files");
  rate->add_option("files", files, "curve files")->required();
  rate->add_option("--fit", fit, "fit window t_min t_max")->expected(2);

  std::optional<double> beta;
  auto* audit = app.add_subcommand("audit", "subadditivity audit");
  audit->add_option("--beta", beta, "coupling amplitude");

  auto* scenario = app.add_subcommand("scenario", "scenario runners");
  scenario->require_subcommand(1);
  scenario->fallthrough();
  std::string scenario_name;
  for (const char* name : {"small-dev", "functional", "annealed", "tail"}) {
    auto* sub = scenario->add_subcommand(name, std::string(name) + " scenario");
    sub->add_option("--beta", beta, "coupling amplitude");
    sub->fallthrough();
    sub->callback([&scenario_name, name] { scenario_name = name; });
  }

  auto* check = app.add_subcommand("check", "analytic acceptance suite at beta = 0 (plus --beta)");
  check->add_option("--beta", beta, "additional coupling amplitude");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? qcorr::kExitOk : qcorr::kExitInput;
  }

  try {
    qcorr::RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw qcorr::ParameterError("cannot read config file " + config_path);
      cfg = qcorr::parse_config(is);
    }
    qcorr::apply_environment_overrides(cfg);
    if (seed) cfg.master_seed = *seed;
    if (output_dir) cfg.output_dir = *output_dir;
    if (workers) cfg.workers = *workers;

    if (sweep->parsed()) {
      cfg.command = qcorr::Command::sweep;
      if (betas) cfg.betas = qcorr::parse_list(*betas);
      if (ensemble) cfg.ensemble_size = *ensemble;
      if (horizon) cfg.horizon = *horizon;
    } else if (rate->parsed()) {
      cfg.command = qcorr::Command::rate;
      cfg.curve_files = files;
      if (fit.size() == 2) cfg.fit_window = qcorr::FitWindow{fit[0], fit[1]};
    } else if (audit->parsed()) {
      cfg.command = qcorr::Command::audit;
      if (beta) cfg.audit_beta = *beta;
    } else if (scenario->parsed()) {
      cfg.command = qcorr::Command::scenario;
      cfg.scenario = qcorr::parse_scenario(scenario_name);
      if (beta) cfg.scenario_beta = *beta;
    } else if (check->parsed()) {
      cfg.command = qcorr::Command::check;
      if (!cfg.master_seed) cfg.master_seed = 1;  // the check suite is a fixed, documented run
      cfg.betas = {0.0};
      if (beta && *beta != 0.0) {
        cfg.betas = {0.0, std::abs(*beta)};
        if (*beta < 0.0) cfg.betas = {*beta, 0.0};
      }
    }
    return qcorr::run(cfg, std::cout);
  } catch (const qcorr::ParameterError& e) {
    std::cerr << "qcorr: invalid input: " << e.what() << "\n";
    return qcorr::kExitInput;
  } catch (const qcorr::NumericalError& e) {
    std::cerr << "qcorr: numerical failure: " << e.what() << "\n";
    return qcorr::kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "qcorr: " << e.what() << "\n";
    return qcorr::kExitInput;
  }
}
