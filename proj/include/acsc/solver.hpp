#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "acsc/core.hpp"
#include "acsc/estep.hpp"
#include "acsc/mstep.hpp"
#include "acsc/stable.hpp"

namespace acsc {

enum class WeightInit { half, inverse_variance };

std::string_view to_string(WeightInit mode);
/// Accepts "half", "inv-var" and "inverse-variance".
WeightInit parse_weight_init(std::string_view name);

/// half: w = 1/2 everywhere. inverse_variance: w_{n,t} = 1 / max(var(x_n), 1e-12).
WeightField init_weights(const TrialSet& x, WeightInit mode);

/// "gaussian-white": i.i.d. standard normal atoms scaled to unit norm.
/// "from-file": atoms read from a model file at `path`.
Dictionary init_dictionary(Index n_atoms, Index atom_len, std::string_view strategy, Rng& rng,
                           const std::string& path = {});

struct FitInit {
  Dictionary dictionary;
  ActivationSet activations;
  /// Replaces the weight_init weights when present.
  std::optional<WeightField> weights;
};

/// M-step defaults for fitting: inner activation solves stop early once an
/// iteration gains less than 1e-6 relative, since every outer iteration
/// revisits them anyway.
inline MStepOptions fit_mstep_defaults() {
  MStepOptions o;
  o.z_ftol = 1e-6;
  return o;
}

struct FitOptions {
  MStepOptions mstep = fit_mstep_defaults();
  EStepOptions estep;
  /// Weights reported when no E-step runs (em_iters == 0). Every E-step
  /// replaces them before any M-step sees them.
  WeightInit weight_init = WeightInit::half;
  /// Independent random dictionary initializations; the run with the lowest
  /// final objective is kept. Ignored when an explicit init is given.
  int restarts = 1;
  std::function<void(const FitRecord&)> progress;
};

struct FitResult {
  Dictionary dictionary;
  ActivationSet activations;
  WeightField weights;
  FitHistory history;
  double final_objective = 0.0;
  long z_iterations = 0;
  long d_iterations = 0;
  /// Index of the kept restart (0 for the first).
  int restart = 0;
};

/// Monte Carlo EM: for each of hp.em_iters outer iterations, estimate the
/// weights from the current residuals, then run hp.mstep_iters alternating
/// activation/atom updates warm-started from the previous iterates. Without
/// `init` the atoms are Gaussian white noise drawn from the seed and the
/// activations start at zero; restart r > 0 draws its atoms from stream r.
FitResult fit(const TrialSet& x, const HyperParams& hp, const std::optional<FitInit>& init = {},
              const FitOptions& options = {});

}  // namespace acsc
