#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "msgd/experiments.hpp"

namespace {

// Exit codes: 0 all assertions pass, 1 assertion failure, 2 usage/config error.
int run_command(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                const std::optional<std::string>& out_dir) {
  nlohmann::json config;
  {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open config file " << config_path << "\n";
      return 2;
    }
    try {
      in >> config;
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
      return 2;
    }
  }
  if (seed) config["seed"] = *seed;
  if (out_dir) config["output_dir"] = *out_dir;

  msgd::ExperimentResult result;
  try {
    result = msgd::run_experiment(config);
  } catch (const msgd::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  for (const msgd::AssertionRecord& a : result.assertions) {
    std::cout << (a.passed ? "[pass] " : "[FAIL] ") << a.name
              << " (observed " << a.observed << ", limit " << a.limit << ")\n";
  }
  std::cout << "wrote " << config.at("output_dir").get<std::string>() << " in "
            << result.wall_time_seconds << " s\n";
  if (!result.passed) {
    std::cerr << "assertion failure:";
    for (const msgd::AssertionRecord& a : result.assertions) {
      if (!a.passed) std::cerr << " " << a.name;
    }
    std::cerr << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"msgd_lab: multiplicative-SGD noise laboratory"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment described by a JSON config");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  run->add_option("config", config_path, "path to the JSON config")->required();
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out_dir, "override the config output_dir");

  auto* list = app.add_subcommand("list", "list available experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (list->parsed()) {
    for (const auto& [name, blurb] : msgd::experiment_catalog()) {
      std::cout << name << "  -  " << blurb << "\n";
    }
    return 0;
  }
  return run_command(config_path, seed, out_dir);
}
