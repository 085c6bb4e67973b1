#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "acsc/core.hpp"
#include "acsc/error.hpp"
#include "acsc/estep.hpp"
#include "acsc/experiments.hpp"
#include "acsc/mstep.hpp"
#include "acsc/solver.hpp"
#include "acsc/stable.hpp"

namespace py = pybind11;
using namespace acsc;

namespace {

using RowMatrix = acsc::Matrix;

HyperParams make_hp(Index n_atoms, Index atom_len, double alpha, double lambda, int em_iters,
                    int mstep_iters, int mcmc_iters, int burn_in, std::uint64_t seed) {
  HyperParams hp;
  hp.alpha = alpha;
  hp.lambda = lambda;
  hp.n_atoms = n_atoms;
  hp.atom_len = atom_len;
  hp.em_iters = em_iters;
  hp.mstep_iters = mstep_iters;
  hp.mcmc_iters = mcmc_iters;
  hp.burn_in = burn_in;
  hp.seed = seed;
  return hp;
}

py::dict fit_py(const RowMatrix& x, Index n_atoms, Index atom_len, double alpha, double lambda,
                int em_iters, int mstep_iters, int mcmc_iters, int burn_in, std::uint64_t seed,
                const std::string& z_solver, const std::string& d_solver, int jobs) {
  const HyperParams hp =
      make_hp(n_atoms, atom_len, alpha, lambda, em_iters, mstep_iters, mcmc_iters, burn_in, seed);
  FitOptions fo;
  fo.mstep.z_solver = parse_z_solver(z_solver);
  fo.mstep.d_solver = parse_d_solver(d_solver);
  fo.mstep.jobs = fo.estep.jobs = jobs;
  FitResult r;
  {
    py::gil_scoped_release release;
    r = fit(TrialSet(x), hp, std::nullopt, fo);
  }
  py::list history;
  for (const auto& rec : r.history) {
    history.append(py::dict(py::arg("em_iter") = rec.em_iter, py::arg("inner_iter") = rec.inner_iter,
                            py::arg("objective") = rec.objective,
                            py::arg("elapsed_seconds") = rec.elapsed_seconds,
                            py::arg("acceptance_rate") = rec.mcmc_acceptance_rate));
  }
  py::dict out;
  out["atoms"] = r.dictionary.atoms();
  out["activations"] = r.activations.values();
  out["weights"] = r.weights.values();
  out["history"] = history;
  out["objective"] = r.final_objective;
  return out;
}

}  // namespace

PYBIND11_MODULE(_alphacsc, m) {
  m.doc() = "Alpha-stable convolutional sparse coding";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "sample_stable",
      [](double alpha, double beta, double sigma, double mu, Index n, std::uint64_t seed) {
        StableParams p{alpha, beta, sigma, mu};
        p.validate();
        Rng rng(seed);
        Vector out(n);
        for (Index i = 0; i < n; ++i) out[i] = sample_stable(p, rng);
        return out;
      },
      py::arg("alpha"), py::arg("beta") = 0.0, py::arg("sigma") = 1.0, py::arg("mu") = 0.0,
      py::arg("n") = 1, py::arg("seed") = 0);

  m.def(
      "characteristic_function",
      [](double alpha, double beta, double sigma, double mu, double omega) {
        StableParams p{alpha, beta, sigma, mu};
        p.validate();
        return characteristic_function(p, omega);
      },
      py::arg("alpha"), py::arg("beta"), py::arg("sigma"), py::arg("mu"), py::arg("omega"));

  m.def(
      "reconstruct",
      [](const RowMatrix& atoms, const Vector& z_n) {
        return reconstruct(Dictionary(atoms), {z_n.data(), static_cast<std::size_t>(z_n.size())});
      },
      py::arg("atoms"), py::arg("z_n"), "Sum of atom/activation convolutions for one trial.");

  m.def(
      "weighted_objective",
      [](const RowMatrix& x, const RowMatrix& atoms, const RowMatrix& z, const RowMatrix& w,
         double lambda) {
        const Dictionary d(atoms);
        return weighted_objective(TrialSet(x), d, ActivationSet(d.n_atoms(), z), WeightField(w),
                                  lambda);
      },
      py::arg("x"), py::arg("atoms"), py::arg("z"), py::arg("w"), py::arg("lam"));

  m.def(
      "estimate_weights",
      [](const RowMatrix& x, const RowMatrix& x_hat, double alpha, int mcmc_iters, int burn_in,
         std::uint64_t seed, int em_iter) {
        HyperParams hp;
        hp.alpha = alpha;
        hp.mcmc_iters = mcmc_iters;
        hp.burn_in = burn_in;
        hp.seed = seed;
        const EStepResult e = estimate_weights(TrialSet(x), x_hat, hp, em_iter);
        return py::make_tuple(e.weights.values(), e.acceptance_rate);
      },
      py::arg("x"), py::arg("x_hat"), py::arg("alpha"), py::arg("mcmc_iters") = 10,
      py::arg("burn_in") = 5, py::arg("seed") = 0, py::arg("em_iter") = 1);

  m.def(
      "generate_synthetic",
      [](Index n_trials, Index trial_len, Index n_atoms, Index atom_len, double noise_std,
         std::uint64_t seed) {
        Rng rng = derive_stream(seed, StreamTag::synthetic);
        SyntheticData d = generate_synthetic(n_trials, trial_len, n_atoms, atom_len, noise_std, rng);
        py::dict out;
        out["trials"] = d.trials.data();
        out["atoms"] = d.truth.dictionary.atoms();
        out["activations"] = d.truth.activations.values();
        return out;
      },
      py::arg("n_trials"), py::arg("trial_len"), py::arg("n_atoms"), py::arg("atom_len"),
      py::arg("noise_std") = 0.01, py::arg("seed") = 0);

  m.def(
      "atom_distance",
      [](const RowMatrix& estimated, const RowMatrix& truth) {
        return atom_distance(Dictionary(estimated), Dictionary(truth));
      },
      py::arg("estimated"), py::arg("truth"));

  m.def("fit", &fit_py, py::arg("x"), py::arg("n_atoms") = 2, py::arg("atom_len") = 64,
        py::arg("alpha") = 2.0, py::arg("lam") = 0.1, py::arg("em_iters") = 5,
        py::arg("mstep_iters") = 50, py::arg("mcmc_iters") = 10, py::arg("burn_in") = 5,
        py::arg("seed") = 0, py::arg("z_solver") = "lbfgsb", py::arg("d_solver") = "joint",
        py::arg("jobs") = 1);
}
