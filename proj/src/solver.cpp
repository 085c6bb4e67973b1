#include "acsc/solver.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "acsc/error.hpp"
#include "acsc/io.hpp"

namespace acsc {

std::string_view to_string(WeightInit mode) {
  return mode == WeightInit::half ? "half" : "inv-var";
}

WeightInit parse_weight_init(std::string_view name) {
  if (name == "half") return WeightInit::half;
  if (name == "inv-var" || name == "inverse-variance") return WeightInit::inverse_variance;
  throw std::invalid_argument("unknown weight init: " + std::string(name));
}

WeightField init_weights(const TrialSet& x, WeightInit mode) {
  if (mode == WeightInit::half) return WeightField::constant(x.n_trials(), x.trial_len(), 0.5);
  Matrix w(x.n_trials(), x.trial_len());
  for (Index n = 0; n < x.n_trials(); ++n) {
    const auto row = x.data().row(n);
    const double mean = row.mean();
    const double var = (row.array() - mean).square().mean();
    w.row(n).setConstant(1.0 / std::max(var, 1e-12));
  }
  return WeightField(std::move(w));
}

Dictionary init_dictionary(Index n_atoms, Index atom_len, std::string_view strategy, Rng& rng,
                           const std::string& path) {
  require(n_atoms >= 1 && atom_len >= 1, "init_dictionary: K and L must be >= 1");
  if (strategy == "from-file") {
    require(!path.empty(), "init_dictionary: from-file needs a path");
    Dictionary d = read_model(path).dictionary;
    require(d.n_atoms() == n_atoms && d.atom_len() == atom_len,
            "init_dictionary: file dictionary has the wrong shape");
    return d;
  }
  require(strategy == "gaussian-white",
          "init_dictionary: unknown strategy " + std::string(strategy));
  Matrix atoms(n_atoms, atom_len);
  for (Index k = 0; k < n_atoms; ++k) {
    for (Index i = 0; i < atom_len; ++i) atoms(k, i) = rng.normal();
    const double norm = atoms.row(k).norm();
    // A zero draw has probability zero; keep the guard for L = 1 corner cases.
    if (norm > 0.0) atoms.row(k) /= norm;
    else atoms(k, 0) = 1.0;
  }
  return Dictionary(std::move(atoms));
}

namespace {

FitResult run_em(const TrialSet& x, const HyperParams& hp, FitResult result,
                 const FitOptions& options) {
  MStepOptions mopt = options.mstep;
  mopt.z_tol = mopt.d_tol = hp.grad_tol;
  mopt.z_max_iter = mopt.d_max_iter = hp.max_inner_iters;
  MStepState state;

  const auto start = std::chrono::steady_clock::now();
  ImpulseState chains;
  for (int i = 1; i <= hp.em_iters; ++i) {
    const Matrix x_hat = reconstruct_all(result.dictionary, result.activations);
    EStepResult e;
    try {
      e = estimate_weights(x, x_hat, hp, i, options.estep,
                           options.estep.persist_chains && chains.phi.size() ? &chains : nullptr);
    } catch (const NumericalError& err) {
      throw NumericalError("E-step " + std::to_string(i) + ": " + err.what());
    }
    result.weights = std::move(e.weights);
    if (options.estep.persist_chains) chains = std::move(e.final_state);

    for (int m = 1; m <= hp.mstep_iters; ++m) {
      try {
        mstep_iteration(x, result.weights, hp.lambda, result.dictionary, result.activations, state,
                        mopt);
      } catch (const NumericalError& err) {
        throw NumericalError("EM iteration " + std::to_string(i) + ", M-step iteration " +
                             std::to_string(m) + ": " + err.what());
      }
      FitRecord rec;
      rec.em_iter = i;
      rec.inner_iter = m;
      rec.objective = weighted_objective(x, result.dictionary, result.activations, result.weights,
                                         hp.lambda);
      rec.elapsed_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      rec.mcmc_acceptance_rate = e.acceptance_rate;
      result.history.push_back(rec);
      if (options.progress) options.progress(rec);
    }
  }
  result.final_objective =
      weighted_objective(x, result.dictionary, result.activations, result.weights, hp.lambda);
  result.z_iterations = state.z_iterations;
  result.d_iterations = state.d_iterations;
  return result;
}

}  // namespace

FitResult fit(const TrialSet& x, const HyperParams& hp, const std::optional<FitInit>& init,
              const FitOptions& options) {
  hp.validate();
  require(hp.atom_len <= x.trial_len(), "fit: atoms longer than trials");
  require(options.restarts >= 1, "fit: restarts must be >= 1");
  const Index P = x.trial_len() - hp.atom_len + 1;

  FitResult start;
  if (init) {
    require(init->dictionary.n_atoms() == hp.n_atoms && init->dictionary.atom_len() == hp.atom_len,
            "fit: initial dictionary does not match n_atoms/atom_len");
    check_dims(x, init->dictionary, init->activations);
    start.dictionary = init->dictionary;
    start.activations = init->activations;
  } else {
    start.activations = ActivationSet(x.n_trials(), hp.n_atoms, P);
  }
  if (init && init->weights) {
    require(init->weights->n_trials() == x.n_trials() && init->weights->trial_len() == x.trial_len(),
            "fit: initial weights do not match the trials");
    start.weights = *init->weights;
  } else {
    start.weights = init_weights(x, options.weight_init);
  }
  if (init) return run_em(x, hp, std::move(start), options);

  FitResult best;
  for (int r = 0; r < options.restarts; ++r) {
    FitResult attempt = start;
    Rng rng = derive_stream(hp.seed, StreamTag::dictionary_init, static_cast<std::uint64_t>(r));
    attempt.dictionary = init_dictionary(hp.n_atoms, hp.atom_len, "gaussian-white", rng);
    attempt = run_em(x, hp, std::move(attempt), options);
    attempt.restart = r;
    // Strict comparison keeps the earliest restart on ties.
    if (r == 0 || attempt.final_objective < best.final_objective) best = std::move(attempt);
  }
  return best;
}

}  // namespace acsc
