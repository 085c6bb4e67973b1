#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acsc/core.hpp"
#include "acsc/mstep.hpp"
#include "acsc/stable.hpp"

namespace acsc {

struct SyntheticTruth {
  Dictionary dictionary;
  ActivationSet activations;
  std::vector<bool> corrupted;
  double noise_std = 0.0;
};

struct SyntheticData {
  TrialSet trials;
  SyntheticTruth truth;
};

/// K zero-mean unit-norm atoms of length L (atom k cycles through a windowed
/// sine, a square wave and a triangle wave with random period and phase), one
/// activation per (trial, atom) at an instant uniform in [0, T - L] with an
/// amplitude uniform in [0, 1], plus i.i.d. N(0, noise_std^2) noise.
SyntheticData generate_synthetic(Index n_trials, Index trial_len, Index n_atoms, Index atom_len,
                                 double noise_std, Rng& rng);

struct Corruption {
  TrialSet trials;
  std::vector<bool> mask;
};

/// Adds N(0, noise_std^2) noise to floor(fraction * N) trials chosen without
/// replacement.
Corruption corrupt_trials(const TrialSet& x, double fraction, double noise_std, Rng& rng);

struct Alignment {
  double distance = 0.0;              // sum of per-atom distances / K
  std::vector<double> per_atom;       // indexed by truth atom
  std::vector<Index> match;           // truth atom k <- estimated atom match[k]
  std::vector<int> sign;
  std::vector<Index> shift;           // circular shift applied to the estimate
};

/// Best alignment of `estimated` onto `truth` over atom permutations, sign
/// flips and circular shifts in [-L/2, L/2].
Alignment align_atoms(const Dictionary& estimated, const Dictionary& truth);
double atom_distance(const Dictionary& estimated, const Dictionary& truth);

struct BenchSetting {
  Index n_atoms = 2;
  Index atom_len = 32;
  Index trial_len = 512;
  Index n_trials = 10;
  double lambda = 0.1;
};

enum class BenchMode {
  /// Full alpha = 2 M-step (alternating z and d updates).
  mstep,
  /// Convex activation subproblem with the ground-truth atoms fixed.
  z_subproblem,
};

struct BenchSolver {
  std::string name;
  ZSolver z_solver = ZSolver::lbfgsb;
  DSolver d_solver = DSolver::joint;
};

struct BenchOptions {
  BenchMode mode = BenchMode::mstep;
  int n_seeds = 24;
  std::uint64_t seed = 0;
  double target_precision = 0.01;
  double noise_std = 0.01;
  /// M-step mode: outer iterations cap and relative-decrease stopping rule.
  int max_iters = 200;
  double stop_tol = 1e-7;
  double inner_tol = 1e-8;
  int inner_max_iter = 1000;
  int jobs = 1;
};

struct BenchRecord {
  std::string solver;
  BenchSetting setting;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<double> objectives;
  bool converged = false;
};

struct BenchSummaryRow {
  std::string solver;
  BenchSetting setting;
  int runs = 0;
  int reached = 0;
  /// Geometric mean over converged runs; NaN when none reached the target.
  double time_to_target = 0.0;
  std::string note;
};

struct BenchReport {
  std::vector<BenchRecord> records;
  std::vector<BenchSummaryRow> summary;
};

/// First time at which (f - f*) / f* <= target, f* the curve's own minimum.
/// Returns NaN when the curve never gets there.
double time_to_precision(const BenchRecord& record, double target);

/// Per (setting, solver, seed) runs the configured problem, timing only the
/// solver calls, then summarizes per (setting, solver) the geometric-mean
/// time to the target relative precision over converged runs.
BenchReport run_benchmark(const std::vector<BenchSetting>& settings,
                          const std::vector<BenchSolver>& solvers, const BenchOptions& options);

/// Rebuilds the summary from raw records (as run_benchmark does).
std::vector<BenchSummaryRow> summarize(const std::vector<BenchRecord>& records,
                                       const std::vector<BenchSetting>& settings,
                                       const std::vector<BenchSolver>& solvers, double target);

}  // namespace acsc
