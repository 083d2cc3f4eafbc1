#include <CLI11.hpp>

#include <iostream>

#include "fracneu/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Radial nonlocal Neumann solver: spectra, hypotheses, mountain-pass solve, verification"};
  app.require_subcommand(0, 1);
  bool print_defaults = false;
  app.add_flag("--print-defaults", print_defaults, "print the default configuration file and exit");

  std::string config;
  std::optional<unsigned> seed;
  auto add = [&](const std::string& name, const std::string& help) {
    auto* sc = app.add_subcommand(name, help);
    sc->add_option("--config", config, "INI configuration file")->required()->check(CLI::ExistingFile);
    sc->add_option("--seed", seed, "override solver.seed");
    return sc;
  };
  auto* eigs = add("eigs", "Neumann eigenvalues, lambda2_rad and lambda2_plus");
  auto* hyp = add("hypotheses", "check the growth hypotheses on f");
  auto* solve = add("solve", "full pipeline: truncation, mountain pass, verification");
  auto* verify = add("verify", "re-verify the profiles written by solve");
  auto* oracle = add("oracle", "compare against brute-force oracles on a tiny grid");

  CLI11_PARSE(app, argc, argv);
  if (print_defaults) {
    std::cout << fracneu::default_config_text();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 1;
  }

  fracneu::RunConfig cfg;
  try {
    cfg = fracneu::load_config(config);
  } catch (const std::exception& e) {
    std::cerr << "[fracneu] invalid configuration: " << e.what() << '\n';
    std::cout << R"({"schema":")" << fracneu::kSchema << R"(","exit_code":2,"error":)"
              << '"' << e.what() << "\"}\n";
    return fracneu::kHypothesisFailure;
  }
  if (seed) cfg.seed = *seed;

  if (eigs->parsed()) return fracneu::run_eigs(cfg);
  if (hyp->parsed()) return fracneu::run_hypotheses(cfg);
  if (solve->parsed()) return fracneu::run_pipeline(cfg).exit_code;
  if (verify->parsed()) return fracneu::run_verify(cfg);
  if (oracle->parsed()) return fracneu::run_oracle(cfg);
  return 1;
}
