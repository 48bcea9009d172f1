#pragma once

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace msgd {

/// Invalid or incomplete experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AssertionRecord {
  std::string name;
  bool passed = false;
  double observed = 0.0;
  double limit = 0.0;
};

struct ExperimentResult {
  bool passed = true;
  std::vector<AssertionRecord> assertions;
  nlohmann::json details;
  double wall_time_seconds = 0.0;
};

/// (name, one-line description) of every experiment.
const std::vector<std::pair<std::string, std::string>>& experiment_catalog();

/// Dispatch on config["experiment"], write results.csv (plus companions)
/// and metadata.json under config["output_dir"], evaluate the experiment's
/// built-in assertions. Config needs "experiment", "seed", "output_dir".
/// Throws ConfigError on invalid configs.
ExperimentResult run_experiment(const nlohmann::json& config);

}  // namespace msgd
