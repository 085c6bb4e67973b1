#include "acsc/estep.hpp"

#include <cmath>

#include "acsc/error.hpp"
#include "acsc/parallel.hpp"

namespace acsc {

void ImpulseState::validate() const {
  require(phi.allFinite() && (phi.array() > 0.0).all(),
          "ImpulseState: phi must be finite and strictly positive");
}

double acceptance_prob(double phi_cur, double phi_prop, double residual) {
  require(phi_cur > 0.0 && phi_prop > 0.0, "acceptance_prob: phi must be positive");
  const double log_ratio = 0.5 * (std::log(phi_cur) - std::log(phi_prop)) +
                           residual * residual * (1.0 / phi_cur - 1.0 / phi_prop);
  if (log_ratio >= 0.0) return 1.0;
  return std::exp(log_ratio);
}

Index mh_sweep_trial(std::span<double> phi, std::span<const double> residuals,
                     double alpha_model, Rng& rng) {
  require(phi.size() == residuals.size(), "mh_sweep: state and residual sizes differ");
  Index accepted = 0;
  for (std::size_t t = 0; t < phi.size(); ++t) {
    const double proposal = sample_positive_stable(alpha_model, rng);
    const double u = rng.uniform();
    if (u < acceptance_prob(phi[t], proposal, residuals[t])) {
      phi[t] = proposal;
      ++accepted;
    }
  }
  return accepted;
}

SweepResult mh_sweep(ImpulseState state, const Matrix& residuals, double alpha_model, Rng& rng) {
  state.validate();
  require(state.phi.rows() == residuals.rows() && state.phi.cols() == residuals.cols(),
          "mh_sweep: state and residual shapes differ");
  const Index T = state.phi.cols();
  Index accepted = 0;
  for (Index n = 0; n < state.phi.rows(); ++n) {
    std::span<double> row(state.phi.data() + n * T, static_cast<std::size_t>(T));
    std::span<const double> res(residuals.data() + n * T, static_cast<std::size_t>(T));
    accepted += mh_sweep_trial(row, res, alpha_model, rng);
  }
  const double rate = static_cast<double>(accepted) / static_cast<double>(state.phi.size());
  return {std::move(state), rate};
}

ImpulseState draw_prior_state(Index n_trials, Index trial_len, double alpha_model, Rng& rng) {
  ImpulseState state{Matrix(n_trials, trial_len)};
  for (Index i = 0; i < state.phi.size(); ++i) {
    state.phi.data()[i] = sample_positive_stable(alpha_model, rng);
  }
  return state;
}

EStepResult estimate_weights(const TrialSet& x, const Matrix& x_hat, const HyperParams& hp,
                             int em_iter, const EStepOptions& options,
                             const ImpulseState* previous) {
  require(hp.mcmc_iters > hp.burn_in && hp.burn_in >= 0,
          "estimate_weights: mcmc_iters must exceed burn_in");
  require(hp.alpha > 0.0 && hp.alpha <= 2.0, "estimate_weights: alpha must lie in (0, 2]");
  const Index N = x.n_trials();
  const Index T = x.trial_len();
  require(x_hat.rows() == N && x_hat.cols() == T, "estimate_weights: x_hat shape mismatch");

  if (hp.alpha == 2.0) {
    return {WeightField::constant(N, T, 0.5), ImpulseState{}, 1.0, 0};
  }

  const bool resume = options.persist_chains && previous != nullptr && previous->phi.rows() == N &&
                      previous->phi.cols() == T;
  Matrix phi(N, T);
  Matrix inv_sum = Matrix::Zero(N, T);
  std::vector<Index> accepted(static_cast<std::size_t>(N), 0);
  const Matrix residuals = x.data() - x_hat;
  const int kept = hp.mcmc_iters - hp.burn_in;

  parallel_for(N, options.jobs, [&](Index n) {
    Rng rng = derive_stream(hp.seed, StreamTag::estep, static_cast<std::uint64_t>(em_iter),
                            static_cast<std::uint64_t>(n));
    std::span<double> chain(phi.data() + n * T, static_cast<std::size_t>(T));
    std::span<const double> res(residuals.data() + n * T, static_cast<std::size_t>(T));
    if (resume) {
      for (Index t = 0; t < T; ++t) chain[t] = previous->phi(n, t);
    } else {
      for (Index t = 0; t < T; ++t) chain[t] = sample_positive_stable(hp.alpha, rng);
    }
    double* acc = inv_sum.data() + n * T;
    for (int j = 0; j < hp.mcmc_iters; ++j) {
      accepted[static_cast<std::size_t>(n)] += mh_sweep_trial(chain, res, hp.alpha, rng);
      if (j >= hp.burn_in) {
        for (Index t = 0; t < T; ++t) acc[t] += 1.0 / chain[t];
      }
    }
  });

  Index total_accepted = 0;
  for (Index a : accepted) total_accepted += a;
  const double sweeps = static_cast<double>(N) * static_cast<double>(T) * hp.mcmc_iters;
  const auto draws = static_cast<std::uint64_t>(N * T) *
                     static_cast<std::uint64_t>(hp.mcmc_iters + (resume ? 0 : 1));

  EStepResult result;
  result.weights = WeightField(inv_sum / static_cast<double>(kept));
  result.final_state = ImpulseState{std::move(phi)};
  result.acceptance_rate = static_cast<double>(total_accepted) / sweeps;
  result.sampler_calls = draws;
  return result;
}

}  // namespace acsc
