#include <CLI11.hpp>

#include <iostream>

#include "stm/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Space-time saddle-point solver for monotone parabolic problems"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  for (const std::string& name : stm::subcommand_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "flat key = value configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : stm::kExitConfig;
  }

  stm::ExperimentConfig cfg;
  try {
    cfg = stm::parse_config(config_path);
  } catch (const stm::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return stm::kExitConfig;
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  return stm::run_subcommand(app.get_subcommands().front()->get_name(), cfg, std::cout, std::cerr);
}
