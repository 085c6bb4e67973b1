#pragma once

#include <string>
#include <vector>

#include "acsc/core.hpp"
#include "acsc/experiments.hpp"
#include "acsc/mstep.hpp"
#include "acsc/solver.hpp"

namespace acsc {

/// Everything a command needs. Defaults < config file < command-line flags.
struct RunConfig {
  HyperParams hp;
  ZSolver z_solver = ZSolver::lbfgsb;
  DSolver d_solver = DSolver::joint;
  WeightInit weight_init = WeightInit::half;
  int jobs = 1;
  int bcd_passes = 1;
  bool persist_chains = false;
  int restarts = 1;
  double z_ftol = fit_mstep_defaults().z_ftol;

  // generate
  Index n_trials = 100;
  Index trial_len = 512;
  double noise_std = 0.01;
  double corrupt_fraction = 0.0;
  double corrupt_noise_std = 0.1;

  // paths
  std::string trials;
  std::string truth;
  std::string model;
  std::string history;
  std::string init;
  std::string output;
  std::string summary;

  // bench
  std::vector<BenchSetting> settings;
  std::vector<std::string> solvers;
  BenchOptions bench;
};

/// Applies the keys of a JSON object to `base`. Unknown keys, wrong types
/// and out-of-range values are rejected with std::invalid_argument.
RunConfig apply_config_json(const std::string& text, RunConfig base);
RunConfig load_config(const std::string& path, RunConfig base = {});

/// "lbfgsb", "ista", "fista" (atoms by the joint dual solve) or
/// "<z>+<d>", e.g. "lbfgsb+bcd".
BenchSolver parse_bench_solver(const std::string& name);

/// Each command validates its configuration and inputs before writing any
/// file, and returns the text it prints on stdout.
std::string cmd_generate(const RunConfig& cfg);
std::string cmd_fit(const RunConfig& cfg);
std::string cmd_bench(const RunConfig& cfg);
std::string cmd_eval(const RunConfig& cfg);

}  // namespace acsc
