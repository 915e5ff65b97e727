#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "statrom/experiments.hpp"

namespace {

// every config key doubles as a --flag; flags override file values
void add_config_flags(CLI::App* cmd, std::map<std::string, std::string>& overrides) {
  for (const auto& key : statrom::Config::known_keys())
    cmd->add_option("--" + key, overrides[key]);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reduced-order Helmholtz priors conditioned on sensor data"};
  app.require_subcommand(1);

  struct Verb {
    const char* name;
    const char* help;
    int (*run)(const statrom::Config&);
  };
  const Verb verbs[] = {
      {"converge-rom", "prior accuracy vs. basis size (1d)", statrom::cmd_converge_rom},
      {"sweep", "prior accuracy over a frequency grid (1d)", statrom::cmd_sweep},
      {"statrom-converge", "posterior accuracy vs. basis size (1d)", statrom::cmd_statrom_converge},
      {"scatter2d", "posterior error table for the 2d scattering study", statrom::cmd_scatter2d},
      {"gen-data", "write the synthetic reference and sensor readings", statrom::cmd_gen_data},
      {"plot", "render the CSV files in the output directory as SVG", statrom::cmd_plot},
  };

  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::function<int()> selected;
  for (const auto& verb : verbs) {
    CLI::App* cmd = app.add_subcommand(verb.name, verb.help);
    cmd->add_option("--config", config_path, "key = value configuration file");
    add_config_flags(cmd, overrides);
    cmd->callback([&, run = verb.run] {
      selected = [&, run] {
        statrom::Config cfg =
            config_path.empty() ? statrom::Config() : statrom::Config::load(config_path);
        for (const auto& [key, value] : overrides)
          if (!value.empty()) cfg.set(key, value);
        return run(cfg);
      };
    });
  }

  CLI11_PARSE(app, argc, argv);
  try {
    return selected();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
