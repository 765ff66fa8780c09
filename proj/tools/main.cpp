#include <exception>
#include <iostream>
#include <memory>

#include <fmt/format.h>

#include "common.hpp"
#include "renalci/error.hpp"

int main(int argc, char** argv) {
  using namespace renalci::cli;

  CLI::App app{"Chronicity scoring of six-class renal segmentations, with evaluation and "
               "survival statistics",
               "renalci"};
  app.set_version_flag("--version", RENALCI_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with option defaults");

  Globals g;
  app.add_option("--seed", g.seed, "Random seed for bootstrap and synthesis")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--out", g.out, "Output directory (output file for stitch)");

  int exit_code = kExitOk;
  add_slide_commands(app, g, exit_code);
  add_eval_commands(app, g, exit_code);
  add_survival_commands(app, g, exit_code);
  add_synth_commands(app, g, exit_code);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    app.exit(e);
    return kExitInput;
  } catch (const renalci::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == renalci::ErrorKind::kInput ? kExitInput : kExitComputation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitComputation;
  }
  return exit_code;
}
