// kinklab command-line front end.
#include <iostream>

#include <CLI11.hpp>

#include "kinklab/commands.hpp"
#include "kinklab/errors.hpp"

int main(int argc, char** argv) {
  using namespace kinklab;

  CLI::App app{"Stationary kink profiles of double-well energies"};
  app.require_subcommand(1);

  std::string kink_config;
  auto* kink = app.add_subcommand("kink", "one-field kinks for every k in the config");
  kink->add_option("--config", kink_config, "JSON run configuration")->required();

  std::string poro_config;
  std::string poro_action;
  auto* poro = app.add_subcommand("poro", "two-field poromechanics model");
  poro->add_option("action", poro_action, "phases | coexistence | kink | predict")
      ->required()
      ->check(CLI::IsMember({"phases", "coexistence", "kink", "predict"}));
  poro->add_option("--config", poro_config, "JSON run configuration")->required();

  auto* selftest = app.add_subcommand("selftest", "run the built-in consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (selftest->parsed()) return cmd_selftest(std::cout);
    if (kink->parsed()) return cmd_kink(load_config(kink_config), std::cout, std::cerr);
    if (poro->parsed()) {
      PoroAction action = PoroAction::phases;
      if (poro_action == "coexistence") action = PoroAction::coexistence;
      if (poro_action == "kink") action = PoroAction::kink;
      if (poro_action == "predict") action = PoroAction::predict;
      return cmd_poro(load_config(poro_config), action, std::cout, std::cerr);
    }
  } catch (const ConfigError& e) {
    std::cerr << "kinklab: config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const Error& e) {
    std::cerr << "kinklab: " << e.what() << "\n";
    return kExitSolverError;
  }
  return kExitOk;
}
