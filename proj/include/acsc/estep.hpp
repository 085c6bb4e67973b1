#pragma once

#include <cstdint>
#include <span>

#include "acsc/core.hpp"
#include "acsc/stable.hpp"

namespace acsc {

/// Impulse variables phi_{n,t} of the conditionally Gaussian model, all > 0.
struct ImpulseState {
  Matrix phi;

  void validate() const;
};

/// Metropolis-Hastings acceptance for an independent proposal drawn from the
/// prior, where the prior terms cancel:
///   min{1, exp((log phi_cur - log phi_prop) / 2 + r^2 (1/phi_cur - 1/phi_prop))}.
double acceptance_prob(double phi_cur, double phi_prop, double residual);

/// One sweep over a single trial. Draws, for each t in order, a proposal and
/// then a uniform. Returns the number of accepted moves.
Index mh_sweep_trial(std::span<double> phi, std::span<const double> residuals,
                     double alpha_model, Rng& rng);

struct SweepResult {
  ImpulseState state;
  double acceptance_rate = 0.0;
};

/// One sweep over every (n, t), trials in order, using a single stream.
SweepResult mh_sweep(ImpulseState state, const Matrix& residuals, double alpha_model, Rng& rng);

/// Fresh chain start: phi_{n,t} drawn from the impulse prior.
ImpulseState draw_prior_state(Index n_trials, Index trial_len, double alpha_model, Rng& rng);

struct EStepOptions {
  int jobs = 1;
  /// Start chains from the previous E-step's final state instead of fresh
  /// prior draws.
  bool persist_chains = false;
};

struct EStepResult {
  WeightField weights;
  ImpulseState final_state;  // empty when alpha == 2
  double acceptance_rate = 1.0;
  std::uint64_t sampler_calls = 0;
};

/// Monte Carlo estimate of w_{n,t} = E[1/phi_{n,t} | x, x_hat]. Runs
/// hp.mcmc_iters sweeps per trial, discards the first hp.burn_in and averages
/// 1/phi over the rest. Each trial uses the stream (hp.seed, em_iter, n).
/// alpha == 2 returns w = 1/2 without sampling.
EStepResult estimate_weights(const TrialSet& x, const Matrix& x_hat, const HyperParams& hp,
                             int em_iter, const EStepOptions& options = {},
                             const ImpulseState* previous = nullptr);

}  // namespace acsc
