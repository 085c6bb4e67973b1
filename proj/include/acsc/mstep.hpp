#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "acsc/core.hpp"
#include "acsc/optim.hpp"

namespace acsc {

enum class ZSolver { lbfgsb, ista, fista };
enum class DSolver { joint, bcd };

std::string_view to_string(ZSolver solver);
std::string_view to_string(DSolver solver);
ZSolver parse_z_solver(std::string_view name);
DSolver parse_d_solver(std::string_view name);

/// Lagrange multipliers of the K unit-ball constraints, all >= 0.
struct DualVars {
  Vector beta;
};

/// Normal equations of the atom subproblem over the flattened dictionary
/// d = [d^1; ...; d^K] (length KL):
///   gram = sum_n Z_n^T diag(w_n) Z_n,  rhs = sum_n Z_n^T diag(w_n) x_n,
/// where (Z_n^k)_{t,j} = z_{n,t-j}^k. energy = sum_n sum_t w_{n,t} x_{n,t}^2,
/// so the data term equals d^T gram d - 2 rhs^T d + energy.
struct AtomLinearSystem {
  Index n_atoms = 0;
  Index atom_len = 0;
  Eigen::MatrixXd gram;
  Vector rhs;
  double energy = 0.0;

  double data_term(const Vector& flat_dict) const;
};

/// Gradient of trial n's share of weighted_objective with respect to z_n:
///   -2 correlate(d^k, w_n (x_n - x_hat_n)) + lambda.
/// Only the T - L + 1 real coordinates are returned; padding is never touched.
Vector z_gradient(std::span<const double> x_n, const Dictionary& dict,
                  std::span<const double> z_n, std::span<const double> w_n, double lambda);

struct ZUpdateOptions {
  ZSolver solver = ZSolver::lbfgsb;
  double tol = 1e-8;
  int max_iter = 1000;
  bool record_trace = false;
  /// Relative-decrease stop for the quasi-Newton solver (0 disables).
  double ftol = 0.0;
};

/// Minimizes ||sqrt(w_n) (x_n - sum_k d^k * z^k)||^2 + lambda ||z||_1 over
/// z >= 0, starting from z0. Never returns a point worse than z0.
BoxResult update_activations(std::span<const double> x_n, const Dictionary& dict,
                             std::span<const double> w_n, double lambda,
                             std::span<const double> z0, const ZUpdateOptions& options = {});

/// Assembles the atom normal equations by weighted cross-correlations. When
/// every weight row is constant the per-atom-pair blocks are Toeplitz and are
/// filled from lagged correlations only.
AtomLinearSystem build_atom_system(const TrialSet& x, const ActivationSet& z,
                                   const WeightField& w);
/// Same system through the general weighted path regardless of w.
AtomLinearSystem build_atom_system_general(const TrialSet& x, const ActivationSet& z,
                                           const WeightField& w);

/// d* = (gram + blockdiag(beta^k I_L))^-1 rhs by Cholesky. Throws
/// NumericalError when the regularized system is not positive definite.
Vector primal_from_dual_flat(const AtomLinearSystem& sys, const DualVars& dual);
Dictionary primal_from_dual(const AtomLinearSystem& sys, const DualVars& dual);

/// Lagrange dual g(beta) = min_d data_term(d) + sum_k beta^k (||d^k||^2 - 1)
///                       = energy - rhs^T d*(beta) - sum_k beta^k.
double dual_objective(const AtomLinearSystem& sys, const DualVars& dual);
/// dg/dbeta^k = ||d*^k||^2 - 1.
Vector dual_gradient(const AtomLinearSystem& sys, const DualVars& dual);

struct AtomUpdateOptions {
  double tol = 1e-8;
  int max_iter = 1000;
  /// Starting multipliers; ignored when the size does not match K.
  Vector beta0;
};

struct AtomUpdate {
  Dictionary dict;
  DualVars dual;
  SolverReport report;
  /// No atom has any nonzero activation; dict is d0.
  bool degenerate = false;
  /// Atoms with all-zero activations, left at their d0 value.
  std::vector<bool> inactive;
};

/// Constrained weighted least squares over all atoms jointly, through the
/// dual: maximize g(beta) over beta >= 0 with the box quasi-Newton solver.
AtomUpdate update_atoms(const TrialSet& x, const ActivationSet& z, const WeightField& w,
                        const Dictionary& d0, const AtomUpdateOptions& options = {});

/// Block coordinate descent: one constrained single-atom solve per atom and
/// pass, each on the residual left by the other atoms.
AtomUpdate update_atoms_bcd(const TrialSet& x, const ActivationSet& z, const WeightField& w,
                            const Dictionary& d0, int passes,
                            const AtomUpdateOptions& options = {});

/// Same two solvers on a prebuilt system (used by benchmarks and tests).
AtomUpdate solve_atoms_joint(const AtomLinearSystem& sys, const Dictionary& d0,
                             const std::vector<bool>& inactive, const AtomUpdateOptions& options);
AtomUpdate solve_atoms_bcd(const AtomLinearSystem& sys, const Dictionary& d0,
                           const std::vector<bool>& inactive, int passes,
                           const AtomUpdateOptions& options);

struct MStepOptions {
  ZSolver z_solver = ZSolver::lbfgsb;
  DSolver d_solver = DSolver::joint;
  double z_tol = 1e-8;
  double z_ftol = 0.0;
  int z_max_iter = 1000;
  double d_tol = 1e-8;
  int d_max_iter = 1000;
  int bcd_passes = 1;
  int jobs = 1;
  bool warm_start = true;
};

/// Carried across M-step iterations for warm starts and iteration accounting.
struct MStepState {
  DualVars dual;
  long z_iterations = 0;
  long d_iterations = 0;
};

/// One block coordinate iteration: activations for every trial (in parallel
/// over trials), then atoms. Each half never increases weighted_objective.
void mstep_iteration(const TrialSet& x, const WeightField& w, double lambda, Dictionary& dict,
                     ActivationSet& z, MStepState& state, const MStepOptions& options);

}  // namespace acsc
