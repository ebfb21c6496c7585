#ifndef STOCLEAR_IO_HPP
#define STOCLEAR_IO_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stoclear/market.hpp"
#include "stoclear/metrics.hpp"

namespace stoclear {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// JSON instance schema documented in README. Unknown fields are errors.
Instance parse_instance_json(const std::string& text);
Instance parse_instance(const std::string& path);
std::string print_instance(const Instance& inst);

// Header row maps columns to participant ids; optional leading "prob"
// column, uniform probabilities otherwise.
ScenarioSet parse_scenarios_csv(const std::string& path, const Instance& inst);
ScenarioSet parse_scenarios_csv_text(const std::string& text,
                                     const Instance& inst);

// Names: micro1, pzp6, zkab6.
Instance embedded_instance(const std::string& name);
std::vector<std::string> embedded_instance_names();

struct ExperimentConfig {
  std::string instance;  // path or embedded name
  std::string formulation = "all";  // clairvoyant:<s>|canonical|mean_vector|state_vector|all
  std::string solver = "extensive";  // extensive|ph
  std::vector<Mechanism> mechanisms = {Mechanism::Rc, Mechanism::Rm,
                                       Mechanism::Rs};
  bool perturb = false;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  double tol = 1e-6;
};

struct RunArtifacts {
  std::vector<std::string> files_written;
  std::string summary;
};

RunArtifacts run_experiment(const ExperimentConfig& config);

}  // namespace stoclear

#endif
