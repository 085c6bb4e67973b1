#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace acsc {

using Index = Eigen::Index;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Observed signals, one trial per row (N x T). Entries must be finite.
class TrialSet {
 public:
  TrialSet() = default;
  explicit TrialSet(Matrix data);

  const Matrix& data() const { return data_; }
  Index n_trials() const { return data_.rows(); }
  Index trial_len() const { return data_.cols(); }
  std::span<const double> trial(Index n) const;

 private:
  Matrix data_;
};

/// K atoms of length L, one per row. The unit-ball constraint is not enforced
/// on construction because intermediate and user-supplied dictionaries may
/// violate it; see is_feasible() and project_unit_ball().
class Dictionary {
 public:
  Dictionary() = default;
  explicit Dictionary(Matrix atoms);

  const Matrix& atoms() const { return atoms_; }
  Matrix& atoms() { return atoms_; }
  Index n_atoms() const { return atoms_.rows(); }
  Index atom_len() const { return atoms_.cols(); }
  std::span<const double> atom(Index k) const;

  bool is_feasible(double slack = 1e-9) const;

 private:
  Matrix atoms_;
};

/// Nonnegative activations, stored dense as N x K x P with P = T - L + 1.
/// Row n of the backing matrix holds [z_n^1, ..., z_n^K] back to back.
class ActivationSet {
 public:
  ActivationSet() = default;
  ActivationSet(Index n_trials, Index n_atoms, Index n_shifts);
  ActivationSet(Index n_atoms, Matrix values);

  Index n_trials() const { return values_.rows(); }
  Index n_atoms() const { return n_atoms_; }
  Index n_shifts() const { return n_shifts_; }
  const Matrix& values() const { return values_; }

  std::span<const double> trial(Index n) const;
  std::span<double> trial(Index n);
  std::span<const double> atom(Index n, Index k) const;

  bool is_zero() const;

 private:
  Index n_atoms_ = 0;
  Index n_shifts_ = 0;
  Matrix values_;
};

/// Per-sample E-step weights (N x T), strictly positive and finite.
class WeightField {
 public:
  WeightField() = default;
  explicit WeightField(Matrix values);
  static WeightField constant(Index n_trials, Index trial_len, double value);

  const Matrix& values() const { return values_; }
  Index n_trials() const { return values_.rows(); }
  Index trial_len() const { return values_.cols(); }
  std::span<const double> trial(Index n) const;

  /// True when every row is constant (enables the Toeplitz atom system).
  bool is_constant_per_trial() const;

 private:
  Matrix values_;
};

struct HyperParams {
  double alpha = 2.0;
  double lambda = 0.1;
  Index n_atoms = 2;
  Index atom_len = 64;
  int em_iters = 5;
  int mstep_iters = 50;
  int mcmc_iters = 10;
  int burn_in = 5;
  std::uint64_t seed = 0;
  double grad_tol = 1e-8;
  int max_inner_iters = 1000;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

struct FitRecord {
  int em_iter = 0;
  int inner_iter = 0;
  double objective = 0.0;
  double elapsed_seconds = 0.0;
  double mcmc_acceptance_rate = 0.0;
};

using FitHistory = std::vector<FitRecord>;

/// One nonzero activation, used for sparse I/O.
struct Triplet {
  Index trial;
  Index atom;
  Index time;
  double value;
};

std::vector<Triplet> to_triplets(const ActivationSet& z);
ActivationSet from_triplets(Index n_trials, Index n_atoms, Index n_shifts,
                            std::span<const Triplet> triplets);

/// x_hat_n = sum_k d^k * z_n^k, full linear convolution of length T = P + L - 1.
Vector reconstruct(const Dictionary& dict, std::span<const double> z_n);
Matrix reconstruct_all(const Dictionary& dict, const ActivationSet& z);

/// out[u] = sum_i atom[i] * signal[u + i] for u in [0, signal.size() - L].
void correlate_valid(std::span<const double> atom, std::span<const double> signal,
                     std::span<double> out);

/// Contribution of one trial: ||sqrt(w_n) (x_n - x_hat_n)||^2 + lambda ||z_n||_1.
double trial_objective(std::span<const double> x_n, const Dictionary& dict,
                       std::span<const double> z_n, std::span<const double> w_n,
                       double lambda);

/// sum_n ||sqrt(w_n) (x_n - x_hat_n)||^2 + lambda sum_{n,k} ||z_n^k||_1.
/// With w = 1/2 everywhere this is exactly the plain CSC cost
/// sum_n 1/2 ||x_n - x_hat_n||^2 + lambda ||z_n||_1.
double weighted_objective(const TrialSet& x, const Dictionary& dict, const ActivationSet& z,
                          const WeightField& w, double lambda);

struct ProjectedDictionary {
  Dictionary dict;
  std::vector<double> scales;  // original norm where > 1, else 1
};

ProjectedDictionary project_unit_ball(const Dictionary& dict);

/// Multiplies z_n^k by scales[k] for every trial, so that reconstructions are
/// preserved after project_unit_ball.
ActivationSet rescale_activations(const ActivationSet& z, std::span<const double> scales);

void check_dims(const TrialSet& x, const Dictionary& dict, const ActivationSet& z);

}  // namespace acsc
