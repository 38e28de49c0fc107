#pragma once

// Named example systems and the experiment drivers behind the command line.
// A config is parsed and validated completely before anything is computed.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "selfsim/compactsets.hpp"
#include "selfsim/multicomponent.hpp"

namespace selfsim {

/// One-dimensional system given in the config itself. maps[i][j] lists the
/// translations of x -> a x + v; when absent they come from the supports of
/// sigma (uniform entries become swept families).
struct InlineSystem {
  double a = 0;
  std::vector<std::vector<MCSystem::Entry>> sigma;
  std::vector<std::vector<std::vector<double>>> maps;
  std::vector<IntervalSet> windows;
  std::optional<Eigen::VectorXd> m;
  std::optional<Eigen::MatrixXd> s;
};

struct ExperimentConfig {
  std::string command;  // attractor, measure, fourier, weyl, padic
  std::string system;   // canonical builtin name, or "inline"
  std::optional<InlineSystem> inline_system;
  std::optional<double> tol;
  std::optional<double> grid_step;
  std::vector<double> radii;
  std::vector<double> centers;
  std::vector<double> k;  // fourier abscissae
  std::optional<int> terms;
  std::optional<int> K;
  std::optional<int> max_iter;
  std::optional<int> depth;  // atom depth for singular measures
  std::string out = "out";
  std::string format = "csv";
};

std::vector<std::string> builtin_names();
// Builtins plus the aliases point, silver, silver-mc.
bool is_known_system(const std::string& name);
std::string canonical_system(const std::string& name);

/// ConfigError on malformed JSON, unknown keys, unknown systems, non-positive
/// numbers or a command the system does not support.
ExperimentConfig parse_config(const std::string& json_text);
void validate(const ExperimentConfig& cfg);

struct RunReport {
  std::vector<std::string> files;  // written, in order
  std::vector<std::string> lines;  // human summary
  std::map<std::string, double> values;
  bool pass = true;
};

/// Runs one command. Output files are byte-identical for identical configs.
RunReport run_experiment(const ExperimentConfig& cfg);

}  // namespace selfsim
