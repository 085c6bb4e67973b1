#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acsc/commands.hpp"
#include "acsc/error.hpp"
#include "acsc/io.hpp"

namespace {

using acsc::RunConfig;

// Flags are parsed into temporaries and applied on top of the config file, so
// that only flags actually given override it.
class FlagSet {
 public:
  template <typename T>
  void add(CLI::App* app, const std::string& name, const std::string& help,
           std::function<void(RunConfig&, const T&)> apply) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    appliers_.push_back([opt, value, apply](RunConfig& cfg) {
      if (opt->count() > 0) apply(cfg, *value);
    });
  }

  void apply(RunConfig& cfg) const {
    for (const auto& f : appliers_) f(cfg);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> appliers_;
};

void add_model_flags(CLI::App* app, FlagSet& f) {
  f.add<double>(app, "--alpha", "Stability index of the noise model, in (0, 2]",
                [](RunConfig& c, const double& v) { c.hp.alpha = v; });
  f.add<double>(app, "--lambda", "Sparsity penalty", [](RunConfig& c, const double& v) { c.hp.lambda = v; });
  f.add<long>(app, "--n-atoms", "Number of atoms K", [](RunConfig& c, const long& v) { c.hp.n_atoms = v; });
  f.add<long>(app, "--atom-len", "Atom length L", [](RunConfig& c, const long& v) { c.hp.atom_len = v; });
  f.add<std::uint64_t>(app, "--seed", "Random seed",
                       [](RunConfig& c, const std::uint64_t& v) { c.hp.seed = v; });
  f.add<int>(app, "--jobs", "Worker threads", [](RunConfig& c, const int& v) { c.jobs = v; });
}

void add_solver_flags(CLI::App* app, FlagSet& f) {
  f.add<int>(app, "--em-iters", "Outer EM iterations I", [](RunConfig& c, const int& v) { c.hp.em_iters = v; });
  f.add<int>(app, "--mstep-iters", "M-step iterations M per EM iteration",
             [](RunConfig& c, const int& v) { c.hp.mstep_iters = v; });
  f.add<int>(app, "--mcmc-iters", "MCMC sweeps J per E-step",
             [](RunConfig& c, const int& v) { c.hp.mcmc_iters = v; });
  f.add<int>(app, "--burn-in", "Discarded MCMC sweeps", [](RunConfig& c, const int& v) { c.hp.burn_in = v; });
  f.add<std::string>(app, "--z-solver", "lbfgsb | ista | fista",
                     [](RunConfig& c, const std::string& v) { c.z_solver = acsc::parse_z_solver(v); });
  f.add<std::string>(app, "--d-solver", "joint | bcd",
                     [](RunConfig& c, const std::string& v) { c.d_solver = acsc::parse_d_solver(v); });
  f.add<int>(app, "--restarts", "Random initializations; the lowest final objective wins",
             [](RunConfig& c, const int& v) { c.restarts = v; });
  f.add<double>(app, "--z-ftol", "Relative-decrease stop for activation solves (0 disables)",
                [](RunConfig& c, const double& v) { c.z_ftol = v; });
  f.add<std::string>(app, "--weight-init", "half | inv-var",
                     [](RunConfig& c, const std::string& v) { c.weight_init = acsc::parse_weight_init(v); });
}

void add_data_flags(CLI::App* app, FlagSet& f) {
  f.add<long>(app, "--n-trials", "Number of trials N", [](RunConfig& c, const long& v) { c.n_trials = v; });
  f.add<long>(app, "--trial-len", "Trial length T", [](RunConfig& c, const long& v) { c.trial_len = v; });
  f.add<double>(app, "--noise-std", "Additive Gaussian noise level",
                [](RunConfig& c, const double& v) { c.noise_std = v; });
}

void add_path(CLI::App* app, FlagSet& f, const std::string& name, const std::string& help,
              std::string RunConfig::*member) {
  f.add<std::string>(app, name, help, [member](RunConfig& c, const std::string& v) { c.*member = v; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Alpha-stable convolutional sparse coding"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (unknown keys are rejected)");

  FlagSet gen_flags, fit_flags, bench_flags, eval_flags;

  CLI::App* gen = app.add_subcommand("generate", "Simulate synthetic trials and ground truth");
  add_model_flags(gen, gen_flags);
  add_data_flags(gen, gen_flags);
  gen_flags.add<double>(gen, "--corrupt-fraction", "Fraction of trials to corrupt",
                        [](RunConfig& c, const double& v) { c.corrupt_fraction = v; });
  gen_flags.add<double>(gen, "--corrupt-noise-std", "Noise level of corrupted trials",
                        [](RunConfig& c, const double& v) { c.corrupt_noise_std = v; });
  add_path(gen, gen_flags, "--trials", "Output trials file (.csv for text)", &RunConfig::trials);
  add_path(gen, gen_flags, "--truth", "Output ground-truth model file", &RunConfig::truth);

  CLI::App* fitc = app.add_subcommand("fit", "Learn atoms and activations");
  add_model_flags(fitc, fit_flags);
  add_solver_flags(fitc, fit_flags);
  add_path(fitc, fit_flags, "--trials", "Input trials file", &RunConfig::trials);
  add_path(fitc, fit_flags, "--model", "Output model file", &RunConfig::model);
  add_path(fitc, fit_flags, "--history", "Output history (JSON lines)", &RunConfig::history);
  add_path(fitc, fit_flags, "--init", "Start from this model file", &RunConfig::init);

  CLI::App* bench = app.add_subcommand("bench", "Time solvers to a relative precision");
  add_model_flags(bench, bench_flags);
  add_data_flags(bench, bench_flags);
  bench_flags.add<std::vector<std::string>>(
      bench, "--solvers", "Solvers: lbfgsb, ista, fista or <z>+<d>",
      [](RunConfig& c, const std::vector<std::string>& v) { c.solvers = v; });
  bench_flags.add<int>(bench, "--n-seeds", "Random restarts per cell",
                       [](RunConfig& c, const int& v) { c.bench.n_seeds = v; });
  bench_flags.add<double>(bench, "--target-precision", "Relative precision target",
                          [](RunConfig& c, const double& v) { c.bench.target_precision = v; });
  bench_flags.add<std::string>(bench, "--mode", "mstep | z", [](RunConfig& c, const std::string& v) {
    if (v == "mstep") c.bench.mode = acsc::BenchMode::mstep;
    else if (v == "z") c.bench.mode = acsc::BenchMode::z_subproblem;
    else throw std::invalid_argument("--mode must be 'mstep' or 'z'");
  });
  add_path(bench, bench_flags, "--output", "Output records (JSON)", &RunConfig::output);
  add_path(bench, bench_flags, "--summary", "Output summary (CSV)", &RunConfig::summary);

  CLI::App* eval = app.add_subcommand("eval", "Distance between a model and the ground truth");
  add_path(eval, eval_flags, "--model", "Model file", &RunConfig::model);
  add_path(eval, eval_flags, "--truth", "Ground-truth file", &RunConfig::truth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = acsc::load_config(config_path, cfg);
    std::string out;
    if (gen->parsed()) {
      gen_flags.apply(cfg);
      out = acsc::cmd_generate(cfg);
    } else if (fitc->parsed()) {
      fit_flags.apply(cfg);
      out = acsc::cmd_fit(cfg);
    } else if (bench->parsed()) {
      bench_flags.apply(cfg);
      out = acsc::cmd_bench(cfg);
    } else {
      eval_flags.apply(cfg);
      out = acsc::cmd_eval(cfg);
    }
    std::cout << out;
    return 0;
  } catch (const acsc::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const acsc::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
