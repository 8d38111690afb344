#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "translab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"translab: nonlocal-local transmission experiments"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  bool plot = false;
  unsigned seed = 0;
  for (const char* name : {"exponent", "profile", "solve", "analyze", "flatten-check"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "flat key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--plot", plot, "also write SVG plots");
    sub->add_option("--seed", seed, "seed for randomized checks");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  translab::ExperimentConfig cfg;
  cfg.command = app.get_subcommands().front()->get_name();
  cfg.output_dir = out_dir;
  cfg.plot = plot;
  cfg.seed = seed;
  if (!config_path.empty()) {
    std::ifstream is(config_path);
    std::stringstream ss;
    ss << is.rdbuf();
    try {
      cfg.values = translab::parse_config_text(ss.str());
    } catch (const translab::Error& e) {
      std::cerr << "validation: " << e.what() << "\n";
      return 2;
    }
    auto it = cfg.values.find("command");
    if (it != cfg.values.end() && it->second != cfg.command) {
      std::cerr << "validation: config command '" << it->second << "' differs from subcommand '" << cfg.command
                << "'\n";
      return 2;
    }
  }
  return translab::run(cfg, std::cerr);
}
