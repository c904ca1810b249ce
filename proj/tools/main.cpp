#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace app = dictct::app;

int main(int argc, char** argv) {
  CLI::App cli{"Dictionary-based tomographic reconstruction"};
  cli.require_subcommand(1);

  using Command = void (*)(const app::ExperimentConfig&, std::ostream&);
  const std::pair<const char*, std::pair<const char*, Command>> commands[] = {
      {"phantom", {"write a synthetic textured test image", app::cmd_phantom}},
      {"learn", {"learn a patch dictionary from a training image", app::cmd_learn}},
      {"simulate", {"simulate a noisy parallel-beam sinogram", app::cmd_simulate}},
      {"reconstruct", {"reconstruct an image from a sinogram", app::cmd_reconstruct}},
      {"evaluate", {"compare a reconstruction with the exact image", app::cmd_evaluate}},
      {"sweep", {"run a parameter grid and tabulate errors", app::cmd_sweep}},
  };

  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<CLI::App*, Command> handlers;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = cli.add_subcommand(name, entry.first);
    handlers[sub] = entry.second;
    sub->add_option("-c,--config", config_file, "key=value configuration file");
    for (const auto& spec : app::config_schema()) {
      sub->add_option("--" + spec.name, values[spec.name], spec.help);
    }
  }

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : app::kExitConfig;
  }

  std::map<std::string, std::string> overrides;
  for (const auto& [key, value] : values) {
    for (CLI::App* sub : cli.get_subcommands()) {
      if (sub->count("--" + key) > 0) overrides[key] = value;
    }
  }

  try {
    std::optional<std::filesystem::path> file;
    if (!config_file.empty()) file = config_file;
    const app::ExperimentConfig config = app::load_config(file, overrides);
    handlers.at(cli.get_subcommands().front())(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return app::exit_code_for(e);
  }
  return 0;
}
