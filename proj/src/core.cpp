#include "acsc/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "acsc/error.hpp"

namespace acsc {

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

std::string dims(Index a, Index b) {
  return std::to_string(a) + " vs " + std::to_string(b);
}

}  // namespace

TrialSet::TrialSet(Matrix data) : data_(std::move(data)) {
  require(data_.rows() >= 1 && data_.cols() >= 1, "TrialSet: need at least one trial and sample");
  require(all_finite(data_), "TrialSet: entries must be finite");
}

std::span<const double> TrialSet::trial(Index n) const {
  return {data_.data() + n * data_.cols(), static_cast<std::size_t>(data_.cols())};
}

Dictionary::Dictionary(Matrix atoms) : atoms_(std::move(atoms)) {
  require(atoms_.rows() >= 1 && atoms_.cols() >= 1, "Dictionary: need K >= 1 and L >= 1");
  require(all_finite(atoms_), "Dictionary: entries must be finite");
}

std::span<const double> Dictionary::atom(Index k) const {
  return {atoms_.data() + k * atoms_.cols(), static_cast<std::size_t>(atoms_.cols())};
}

bool Dictionary::is_feasible(double slack) const {
  for (Index k = 0; k < atoms_.rows(); ++k) {
    if (atoms_.row(k).norm() > 1.0 + slack) return false;
  }
  return true;
}

ActivationSet::ActivationSet(Index n_trials, Index n_atoms, Index n_shifts)
    : n_atoms_(n_atoms), n_shifts_(n_shifts), values_(Matrix::Zero(n_trials, n_atoms * n_shifts)) {
  require(n_trials >= 1 && n_atoms >= 1 && n_shifts >= 1, "ActivationSet: invalid shape");
}

ActivationSet::ActivationSet(Index n_atoms, Matrix values)
    : n_atoms_(n_atoms), values_(std::move(values)) {
  require(n_atoms >= 1 && values_.cols() % n_atoms == 0 && values_.cols() > 0,
          "ActivationSet: column count must be a positive multiple of K");
  n_shifts_ = values_.cols() / n_atoms;
  require(all_finite(values_), "ActivationSet: entries must be finite");
  require((values_.array() >= 0.0).all(), "ActivationSet: entries must be nonnegative");
}

std::span<const double> ActivationSet::trial(Index n) const {
  return {values_.data() + n * values_.cols(), static_cast<std::size_t>(values_.cols())};
}

std::span<double> ActivationSet::trial(Index n) {
  return {values_.data() + n * values_.cols(), static_cast<std::size_t>(values_.cols())};
}

std::span<const double> ActivationSet::atom(Index n, Index k) const {
  return trial(n).subspan(static_cast<std::size_t>(k * n_shifts_),
                          static_cast<std::size_t>(n_shifts_));
}

bool ActivationSet::is_zero() const { return (values_.array() == 0.0).all(); }

WeightField::WeightField(Matrix values) : values_(std::move(values)) {
  require(all_finite(values_), "WeightField: entries must be finite");
  require((values_.array() > 0.0).all(), "WeightField: entries must be strictly positive");
}

WeightField WeightField::constant(Index n_trials, Index trial_len, double value) {
  return WeightField(Matrix::Constant(n_trials, trial_len, value));
}

std::span<const double> WeightField::trial(Index n) const {
  return {values_.data() + n * values_.cols(), static_cast<std::size_t>(values_.cols())};
}

bool WeightField::is_constant_per_trial() const {
  for (Index n = 0; n < values_.rows(); ++n) {
    const double first = values_(n, 0);
    if ((values_.row(n).array() != first).any()) return false;
  }
  return true;
}

void HyperParams::validate() const {
  require(alpha > 0.0 && alpha <= 2.0, "alpha must lie in (0, 2]");
  require(lambda > 0.0 && std::isfinite(lambda), "lambda must be positive");
  require(n_atoms >= 1, "n_atoms must be >= 1");
  require(atom_len >= 1, "atom_len must be >= 1");
  require(em_iters >= 0, "em_iters must be >= 0");
  require(mstep_iters >= 0, "mstep_iters must be >= 0");
  require(burn_in >= 0, "burn_in must be >= 0");
  require(mcmc_iters > burn_in, "mcmc_iters must exceed burn_in");
  require(grad_tol > 0.0, "grad_tol must be positive");
  require(max_inner_iters >= 1, "max_inner_iters must be >= 1");
}

std::vector<Triplet> to_triplets(const ActivationSet& z) {
  std::vector<Triplet> out;
  for (Index n = 0; n < z.n_trials(); ++n) {
    for (Index k = 0; k < z.n_atoms(); ++k) {
      const auto zk = z.atom(n, k);
      for (Index t = 0; t < z.n_shifts(); ++t) {
        if (zk[t] != 0.0) out.push_back({n, k, t, zk[t]});
      }
    }
  }
  return out;
}

ActivationSet from_triplets(Index n_trials, Index n_atoms, Index n_shifts,
                            std::span<const Triplet> triplets) {
  ActivationSet z(n_trials, n_atoms, n_shifts);
  for (const auto& tr : triplets) {
    require(tr.trial >= 0 && tr.trial < n_trials && tr.atom >= 0 && tr.atom < n_atoms &&
                tr.time >= 0 && tr.time < n_shifts,
            "activation triplet index out of range");
    require(std::isfinite(tr.value) && tr.value >= 0.0,
            "activation triplet value must be finite and nonnegative");
    z.trial(tr.trial)[tr.atom * n_shifts + tr.time] = tr.value;
  }
  return z;
}

Vector reconstruct(const Dictionary& dict, std::span<const double> z_n) {
  const Index K = dict.n_atoms();
  const Index L = dict.atom_len();
  require(K > 0 && static_cast<Index>(z_n.size()) % K == 0,
          "reconstruct: activation length must be a multiple of K");
  const Index P = static_cast<Index>(z_n.size()) / K;
  require(P >= 1, "reconstruct: empty activations");
  Vector out = Vector::Zero(P + L - 1);
  for (Index k = 0; k < K; ++k) {
    const auto d = dict.atom(k);
    const double* zk = z_n.data() + k * P;
    for (Index u = 0; u < P; ++u) {
      const double a = zk[u];
      if (a == 0.0) continue;
      double* o = out.data() + u;
      for (Index i = 0; i < L; ++i) o[i] += a * d[i];
    }
  }
  return out;
}

Matrix reconstruct_all(const Dictionary& dict, const ActivationSet& z) {
  require(z.n_atoms() == dict.n_atoms(), "reconstruct_all: atom count mismatch " +
                                              dims(z.n_atoms(), dict.n_atoms()));
  const Index T = z.n_shifts() + dict.atom_len() - 1;
  Matrix out(z.n_trials(), T);
  for (Index n = 0; n < z.n_trials(); ++n) out.row(n) = reconstruct(dict, z.trial(n)).transpose();
  return out;
}

void correlate_valid(std::span<const double> atom, std::span<const double> signal,
                     std::span<double> out) {
  const std::size_t L = atom.size();
  require(signal.size() >= L && out.size() == signal.size() - L + 1,
          "correlate_valid: size mismatch");
  // out = H atom with H the P x L Hankel matrix H(u, i) = signal[u + i],
  // viewed in place as a row-major map whose rows overlap (row stride 1).
  const Index P = static_cast<Index>(out.size());
  const Index Ls = static_cast<Index>(L);
  using Hankel = Eigen::Map<const Matrix, Eigen::Unaligned, Eigen::OuterStride<>>;
  const Hankel H(signal.data(), P, Ls, Eigen::OuterStride<>(1));
  Eigen::Map<Vector>(out.data(), P).noalias() = H * Eigen::Map<const Vector>(atom.data(), Ls);
}

double trial_objective(std::span<const double> x_n, const Dictionary& dict,
                       std::span<const double> z_n, std::span<const double> w_n,
                       double lambda) {
  const Vector x_hat = reconstruct(dict, z_n);
  require(static_cast<Index>(x_n.size()) == x_hat.size() && w_n.size() == x_n.size(),
          "trial_objective: dimension mismatch");
  double data = 0.0;
  for (std::size_t t = 0; t < x_n.size(); ++t) {
    const double r = x_n[t] - x_hat[static_cast<Index>(t)];
    data += w_n[t] * r * r;
  }
  double l1 = 0.0;
  for (double v : z_n) l1 += v;
  return data + lambda * l1;
}

void check_dims(const TrialSet& x, const Dictionary& dict, const ActivationSet& z) {
  require(dict.atom_len() <= x.trial_len(),
          "atom length exceeds trial length: " + dims(dict.atom_len(), x.trial_len()));
  require(z.n_trials() == x.n_trials(),
          "activation trial count mismatch: " + dims(z.n_trials(), x.n_trials()));
  require(z.n_atoms() == dict.n_atoms(),
          "activation atom count mismatch: " + dims(z.n_atoms(), dict.n_atoms()));
  require(z.n_shifts() == x.trial_len() - dict.atom_len() + 1,
          "activation length must equal T - L + 1: " +
              dims(z.n_shifts(), x.trial_len() - dict.atom_len() + 1));
}

double weighted_objective(const TrialSet& x, const Dictionary& dict, const ActivationSet& z,
                          const WeightField& w, double lambda) {
  check_dims(x, dict, z);
  require(w.n_trials() == x.n_trials() && w.trial_len() == x.trial_len(),
          "weight field shape mismatch");
  double total = 0.0;
  for (Index n = 0; n < x.n_trials(); ++n) {
    total += trial_objective(x.trial(n), dict, z.trial(n), w.trial(n), lambda);
  }
  return total;
}

ProjectedDictionary project_unit_ball(const Dictionary& dict) {
  ProjectedDictionary out{dict, std::vector<double>(static_cast<std::size_t>(dict.n_atoms()), 1.0)};
  for (Index k = 0; k < dict.n_atoms(); ++k) {
    const double norm = dict.atoms().row(k).norm();
    if (norm > 1.0) {
      out.dict.atoms().row(k) /= norm;
      out.scales[static_cast<std::size_t>(k)] = norm;
    }
  }
  return out;
}

ActivationSet rescale_activations(const ActivationSet& z, std::span<const double> scales) {
  require(static_cast<Index>(scales.size()) == z.n_atoms(), "rescale_activations: need K scales");
  Matrix values = z.values();
  const Index P = z.n_shifts();
  for (Index k = 0; k < z.n_atoms(); ++k) {
    values.middleCols(k * P, P) *= scales[static_cast<std::size_t>(k)];
  }
  return ActivationSet(z.n_atoms(), std::move(values));
}

}  // namespace acsc
