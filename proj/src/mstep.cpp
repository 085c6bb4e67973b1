#include "acsc/mstep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "acsc/error.hpp"
#include "acsc/parallel.hpp"

namespace acsc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Nonzero {
  Index shift;
  double value;
};

std::vector<Nonzero> nonzeros(std::span<const double> v) {
  std::vector<Nonzero> out;
  for (std::size_t u = 0; u < v.size(); ++u) {
    if (v[u] != 0.0) out.push_back({static_cast<Index>(u), v[u]});
  }
  return out;
}

std::vector<bool> inactive_atoms(const ActivationSet& z) {
  std::vector<bool> inactive(static_cast<std::size_t>(z.n_atoms()), true);
  for (Index n = 0; n < z.n_trials(); ++n) {
    for (Index k = 0; k < z.n_atoms(); ++k) {
      if (!inactive[static_cast<std::size_t>(k)]) continue;
      for (double v : z.atom(n, k)) {
        if (v != 0.0) {
          inactive[static_cast<std::size_t>(k)] = false;
          break;
        }
      }
    }
  }
  return inactive;
}

void check_system_inputs(const TrialSet& x, const ActivationSet& z, const WeightField& w) {
  require(z.n_trials() == x.n_trials(), "atom system: trial count mismatch");
  require(z.n_shifts() <= x.trial_len(), "atom system: activations longer than trials");
  require(w.n_trials() == x.n_trials() && w.trial_len() == x.trial_len(),
          "atom system: weight field shape mismatch");
}

void fill_rhs_and_energy(const TrialSet& x, const ActivationSet& z, const WeightField& w,
                         AtomLinearSystem& sys) {
  const Index K = z.n_atoms();
  const Index L = sys.atom_len;
  const Index T = x.trial_len();
  sys.rhs = Vector::Zero(K * L);
  sys.energy = 0.0;
  std::vector<double> wx(static_cast<std::size_t>(T));
  for (Index n = 0; n < x.n_trials(); ++n) {
    const auto xn = x.trial(n);
    const auto wn = w.trial(n);
    for (Index t = 0; t < T; ++t) {
      wx[static_cast<std::size_t>(t)] = wn[t] * xn[t];
      sys.energy += wn[t] * xn[t] * xn[t];
    }
    for (Index k = 0; k < K; ++k) {
      for (const auto& nz : nonzeros(z.atom(n, k))) {
        double* b = sys.rhs.data() + k * L;
        const double* src = wx.data() + nz.shift;
        for (Index i = 0; i < L; ++i) b[i] += nz.value * src[i];
      }
    }
  }
}

void symmetrize(Eigen::MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace

std::string_view to_string(ZSolver solver) {
  switch (solver) {
    case ZSolver::lbfgsb: return "lbfgsb";
    case ZSolver::ista: return "ista";
    case ZSolver::fista: return "fista";
  }
  return "unknown";
}

std::string_view to_string(DSolver solver) {
  return solver == DSolver::joint ? "joint" : "bcd";
}

ZSolver parse_z_solver(std::string_view name) {
  if (name == "lbfgsb") return ZSolver::lbfgsb;
  if (name == "ista") return ZSolver::ista;
  if (name == "fista") return ZSolver::fista;
  throw std::invalid_argument("unknown z solver: " + std::string(name));
}

DSolver parse_d_solver(std::string_view name) {
  if (name == "joint") return DSolver::joint;
  if (name == "bcd") return DSolver::bcd;
  throw std::invalid_argument("unknown d solver: " + std::string(name));
}

double AtomLinearSystem::data_term(const Vector& flat_dict) const {
  return flat_dict.dot(gram * flat_dict) - 2.0 * rhs.dot(flat_dict) + energy;
}

Vector z_gradient(std::span<const double> x_n, const Dictionary& dict,
                  std::span<const double> z_n, std::span<const double> w_n, double lambda) {
  const Index K = dict.n_atoms();
  const Index L = dict.atom_len();
  const Vector x_hat = reconstruct(dict, z_n);
  require(static_cast<Index>(x_n.size()) == x_hat.size() && w_n.size() == x_n.size(),
          "z_gradient: dimension mismatch");
  const Index T = x_hat.size();
  const Index P = T - L + 1;
  std::vector<double> wr(static_cast<std::size_t>(T));
  for (Index t = 0; t < T; ++t) wr[static_cast<std::size_t>(t)] = w_n[t] * (x_n[t] - x_hat[t]);
  Vector grad(K * P);
  for (Index k = 0; k < K; ++k) {
    std::span<double> out(grad.data() + k * P, static_cast<std::size_t>(P));
    correlate_valid(dict.atom(k), wr, out);
  }
  grad = (-2.0 * grad.array() + lambda).matrix();
  return grad;
}

BoxResult update_activations(std::span<const double> x_n, const Dictionary& dict,
                             std::span<const double> w_n, double lambda,
                             std::span<const double> z0, const ZUpdateOptions& options) {
  const Index K = dict.n_atoms();
  const Index L = dict.atom_len();
  const Index T = static_cast<Index>(x_n.size());
  const Index P = T - L + 1;
  require(P >= 1 && static_cast<Index>(z0.size()) == K * P && static_cast<Index>(w_n.size()) == T,
          "update_activations: dimension mismatch");
  require(lambda >= 0.0, "update_activations: lambda must be nonnegative");

  std::vector<double> wr(static_cast<std::size_t>(T));
  // Smooth data term and its gradient; the l1 part is added per solver.
  auto data_and_grad = [&](const Vector& z, Vector& grad) {
    const Vector x_hat = reconstruct(dict, {z.data(), static_cast<std::size_t>(z.size())});
    double value = 0.0;
    for (Index t = 0; t < T; ++t) {
      const double r = x_n[t] - x_hat[t];
      wr[static_cast<std::size_t>(t)] = w_n[t] * r;
      value += w_n[t] * r * r;
    }
    grad.resize(K * P);
    for (Index k = 0; k < K; ++k) {
      correlate_valid(dict.atom(k), wr, {grad.data() + k * P, static_cast<std::size_t>(P)});
    }
    grad *= -2.0;
    return value;
  };
  auto data_only = [&](const Vector& z) {
    const Vector x_hat = reconstruct(dict, {z.data(), static_cast<std::size_t>(z.size())});
    double value = 0.0;
    for (Index t = 0; t < T; ++t) {
      const double r = x_n[t] - x_hat[t];
      value += w_n[t] * r * r;
    }
    return value;
  };

  Vector start = Eigen::Map<const Vector>(z0.data(), K * P).cwiseMax(0.0);
  BoxProblem problem;
  problem.lower = Vector::Zero(K * P);
  problem.upper = Vector::Constant(K * P, kInf);

  BoxResult result;
  if (options.solver == ZSolver::lbfgsb) {
    problem.value_and_gradient = [&](const Vector& z, Vector& grad) {
      const double value = data_and_grad(z, grad) + lambda * z.sum();
      grad.array() += lambda;
      return value;
    };
    problem.objective = [&](const Vector& z) { return data_only(z) + lambda * z.sum(); };
    LbfgsbOptions lo;
    lo.tol = options.tol;
    lo.max_iter = options.max_iter;
    lo.record_trace = options.record_trace;
    lo.ftol = options.ftol;
    result = minimize_box(problem, start, lo);
  } else {
    problem.value_and_gradient = data_and_grad;
    problem.objective = data_only;
    ProxOptions po;
    po.variant = options.solver == ZSolver::ista ? ProxVariant::ista : ProxVariant::fista;
    po.tol = options.tol;
    po.max_iter = options.max_iter;
    po.record_trace = options.record_trace;
    result = fista_box(problem, lambda, start, po);
  }
  if (result.report.status == SolverStatus::numerical_failure) {
    throw NumericalError("update_activations: non-finite objective or gradient");
  }
  const double start_value = data_only(start) + lambda * start.sum();
  if (!(result.report.objective <= start_value)) {
    result.x = start;
    result.report.objective = start_value;
  }
  return result;
}

AtomLinearSystem build_atom_system_general(const TrialSet& x, const ActivationSet& z,
                                           const WeightField& w) {
  check_system_inputs(x, z, w);
  const Index K = z.n_atoms();
  const Index P = z.n_shifts();
  const Index L = x.trial_len() - P + 1;
  AtomLinearSystem sys{K, L, Eigen::MatrixXd::Zero(K * L, K * L), Vector(), 0.0};
  const Index stride = sys.gram.rows();
  struct Spike {
    Index atom;
    Index shift;
    double value;
  };
  std::vector<Spike> spikes;
  for (Index n = 0; n < x.n_trials(); ++n) {
    const auto wn = w.trial(n);
    spikes.clear();
    for (Index k = 0; k < K; ++k) {
      for (const auto& nz : nonzeros(z.atom(n, k))) spikes.push_back({k, nz.shift, nz.value});
    }
    std::stable_sort(spikes.begin(), spikes.end(),
                     [](const Spike& a, const Spike& b) { return a.shift < b.shift; });
    // Spike pair (u, v) touches gram(kL + i, k2 L + i + u - v) with weight w[u + i].
    for (std::size_t p = 0; p < spikes.size(); ++p) {
      const Spike& a = spikes[p];
      for (std::size_t q = 0; q < spikes.size(); ++q) {
        const Spike& b = spikes[q];
        const Index d = a.shift - b.shift;
        if (d >= L) continue;
        if (d <= -L) break;
        const Index i_lo = std::max<Index>(0, -d);
        const Index i_hi = std::min<Index>(L, L - d);
        const double ab = a.value * b.value;
        double* g = sys.gram.data() + (a.atom * L + i_lo) + (b.atom * L + i_lo + d) * stride;
        const double* wt = wn.data() + a.shift + i_lo;
        for (Index i = 0; i < i_hi - i_lo; ++i) g[i * (stride + 1)] += ab * wt[i];
      }
    }
  }
  symmetrize(sys.gram);
  fill_rhs_and_energy(x, z, w, sys);
  return sys;
}

AtomLinearSystem build_atom_system(const TrialSet& x, const ActivationSet& z,
                                   const WeightField& w) {
  check_system_inputs(x, z, w);
  if (!w.is_constant_per_trial()) return build_atom_system_general(x, z, w);

  const Index K = z.n_atoms();
  const Index P = z.n_shifts();
  const Index L = x.trial_len() - P + 1;
  const Index lags = 2 * L - 1;
  // corr(k, k2, lag + L - 1) = sum_n c_n sum_u z^k[u] z^k2[u + lag].
  std::vector<double> corr(static_cast<std::size_t>(K * K * lags), 0.0);
  for (Index n = 0; n < x.n_trials(); ++n) {
    const double c = w.trial(n)[0];
    for (Index k = 0; k < K; ++k) {
      for (const auto& nz : nonzeros(z.atom(n, k))) {
        const Index lag_lo = std::max<Index>(-(L - 1), -nz.shift);
        const Index lag_hi = std::min<Index>(L - 1, P - 1 - nz.shift);
        const double a = c * nz.value;
        for (Index k2 = 0; k2 < K; ++k2) {
          const auto z2 = z.atom(n, k2);
          double* out = corr.data() + (k * K + k2) * lags + (L - 1);
          for (Index lag = lag_lo; lag <= lag_hi; ++lag) out[lag] += a * z2[nz.shift + lag];
        }
      }
    }
  }
  AtomLinearSystem sys{K, L, Eigen::MatrixXd(K * L, K * L), Vector(), 0.0};
  for (Index k = 0; k < K; ++k) {
    for (Index k2 = 0; k2 < K; ++k2) {
      const double* c = corr.data() + (k * K + k2) * lags + (L - 1);
      for (Index i = 0; i < L; ++i) {
        for (Index j = 0; j < L; ++j) sys.gram(k * L + i, k2 * L + j) = c[i - j];
      }
    }
  }
  symmetrize(sys.gram);
  fill_rhs_and_energy(x, z, w, sys);
  return sys;
}

Vector primal_from_dual_flat(const AtomLinearSystem& sys, const DualVars& dual) {
  const Index K = sys.n_atoms;
  const Index L = sys.atom_len;
  require(dual.beta.size() == K, "primal_from_dual: need one multiplier per atom");
  require((dual.beta.array() >= 0.0).all(), "primal_from_dual: multipliers must be >= 0");
  Eigen::MatrixXd a = sys.gram;
  for (Index k = 0; k < K; ++k) {
    a.diagonal().segment(k * L, L).array() += dual.beta[k];
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(
        "primal_from_dual: regularized atom system is singular; raise the multiplier floor");
  }
  Vector d = llt.solve(sys.rhs);
  if (!d.allFinite()) throw NumericalError("primal_from_dual: non-finite solution");
  return d;
}

Dictionary primal_from_dual(const AtomLinearSystem& sys, const DualVars& dual) {
  const Vector d = primal_from_dual_flat(sys, dual);
  Matrix atoms(sys.n_atoms, sys.atom_len);
  for (Index k = 0; k < sys.n_atoms; ++k) atoms.row(k) = d.segment(k * sys.atom_len, sys.atom_len);
  return Dictionary(std::move(atoms));
}

double dual_objective(const AtomLinearSystem& sys, const DualVars& dual) {
  const Vector d = primal_from_dual_flat(sys, dual);
  return sys.energy - sys.rhs.dot(d) - dual.beta.sum();
}

Vector dual_gradient(const AtomLinearSystem& sys, const DualVars& dual) {
  const Vector d = primal_from_dual_flat(sys, dual);
  Vector grad(sys.n_atoms);
  for (Index k = 0; k < sys.n_atoms; ++k) {
    grad[k] = d.segment(k * sys.atom_len, sys.atom_len).squaredNorm() - 1.0;
  }
  return grad;
}

namespace {

Vector flatten(const Dictionary& d) {
  return Eigen::Map<const Vector>(d.atoms().data(), d.atoms().size());
}

Dictionary unflatten(const Vector& flat, Index K, Index L) {
  Matrix atoms(K, L);
  for (Index k = 0; k < K; ++k) atoms.row(k) = flat.segment(k * L, L);
  return Dictionary(std::move(atoms));
}

void project_blocks(Vector& flat, Index K, Index L) {
  for (Index k = 0; k < K; ++k) {
    const double norm = flat.segment(k * L, L).norm();
    if (norm > 1.0) flat.segment(k * L, L) /= norm;
  }
}

bool blocks_feasible(const Vector& flat, Index K, Index L) {
  for (Index k = 0; k < K; ++k) {
    if (flat.segment(k * L, L).norm() > 1.0 + 1e-9) return false;
  }
  return true;
}

// Smallest multiplier that keeps gram + floor I positive definite when the
// gram alone is singular (e.g. two atoms with identical activations).
double multiplier_floor(const Eigen::MatrixXd& gram) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success) return 0.0;
  return 1e-10 * std::max(1.0, gram.diagonal().maxCoeff());
}

struct DualSolve {
  Vector beta;
  Vector d;
  SolverReport report;
};

// Maximizes the dual of min ||.||^2 s.t. ||d^k|| <= 1 for a (sub)system.
DualSolve solve_dual(const Eigen::MatrixXd& gram, const Vector& rhs, Index n_blocks, Index L,
                     const Vector& beta0, const AtomUpdateOptions& options) {
  const double floor = multiplier_floor(gram);
  BoxProblem prob;
  prob.lower = Vector::Constant(n_blocks, floor);
  prob.upper = Vector::Constant(n_blocks, kInf);
  Vector last_d;
  auto solve = [&](const Vector& beta, Vector& d) {
    Eigen::MatrixXd a = gram;
    for (Index k = 0; k < n_blocks; ++k) a.diagonal().segment(k * L, L).array() += beta[k];
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) return false;
    d = llt.solve(rhs);
    return d.allFinite();
  };
  prob.value_and_gradient = [&](const Vector& beta, Vector& grad) {
    Vector d;
    grad.resize(n_blocks);
    if (!solve(beta, d)) {
      grad.setZero();
      return kInf;
    }
    for (Index k = 0; k < n_blocks; ++k) grad[k] = 1.0 - d.segment(k * L, L).squaredNorm();
    // Negated dual without the constant energy term.
    return rhs.dot(d) + beta.sum();
  };
  prob.objective = [&](const Vector& beta) {
    Vector grad;
    return prob.value_and_gradient(beta, grad);
  };
  LbfgsbOptions lo;
  lo.tol = options.tol;
  lo.max_iter = options.max_iter;
  BoxResult res = minimize_box(prob, beta0.cwiseMax(floor), lo);
  DualSolve out{res.x, Vector(), res.report};
  if (!solve(out.beta, out.d)) {
    throw NumericalError("update_atoms: dual solution gives a singular atom system");
  }
  return out;
}

}  // namespace

AtomUpdate solve_atoms_joint(const AtomLinearSystem& sys, const Dictionary& d0,
                             const std::vector<bool>& inactive, const AtomUpdateOptions& options) {
  const Index K = sys.n_atoms;
  const Index L = sys.atom_len;
  require(d0.n_atoms() == K && d0.atom_len() == L, "update_atoms: d0 shape mismatch");
  AtomUpdate out{d0, DualVars{Vector::Zero(K)}, {}, false, inactive};

  std::vector<Index> active;
  for (Index k = 0; k < K; ++k) {
    if (!inactive[static_cast<std::size_t>(k)]) active.push_back(k);
  }
  if (active.empty()) {
    out.degenerate = true;
    out.report.status = SolverStatus::converged;
    return out;
  }
  const Index A = static_cast<Index>(active.size());
  Eigen::MatrixXd gram(A * L, A * L);
  Vector rhs(A * L);
  Vector beta0 = Vector::Zero(A);
  for (Index a = 0; a < A; ++a) {
    const Index ka = active[static_cast<std::size_t>(a)];
    rhs.segment(a * L, L) = sys.rhs.segment(ka * L, L);
    for (Index b = 0; b < A; ++b) {
      const Index kb = active[static_cast<std::size_t>(b)];
      gram.block(a * L, b * L, L, L) = sys.gram.block(ka * L, kb * L, L, L);
    }
    if (options.beta0.size() == K) beta0[a] = std::max(0.0, options.beta0[ka]);
  }

  DualSolve sol = solve_dual(gram, rhs, A, L, beta0, options);
  Vector flat = flatten(d0);
  for (Index a = 0; a < A; ++a) {
    const Index ka = active[static_cast<std::size_t>(a)];
    flat.segment(ka * L, L) = sol.d.segment(a * L, L);
    out.dual.beta[ka] = sol.beta[a];
  }
  project_blocks(flat, K, L);
  out.report = sol.report;

  const Vector old_flat = flatten(d0);
  if (!blocks_feasible(old_flat, K, L) || sys.data_term(flat) <= sys.data_term(old_flat)) {
    out.dict = unflatten(flat, K, L);
  }
  out.report.objective = sys.data_term(flatten(out.dict));
  return out;
}

AtomUpdate solve_atoms_bcd(const AtomLinearSystem& sys, const Dictionary& d0,
                           const std::vector<bool>& inactive, int passes,
                           const AtomUpdateOptions& options) {
  const Index K = sys.n_atoms;
  const Index L = sys.atom_len;
  require(d0.n_atoms() == K && d0.atom_len() == L, "update_atoms_bcd: d0 shape mismatch");
  require(passes >= 1, "update_atoms_bcd: need at least one pass");
  AtomUpdate out{d0, DualVars{Vector::Zero(K)}, {}, false, inactive};
  if (options.beta0.size() == K) out.dual.beta = options.beta0.cwiseMax(0.0);

  bool any_active = false;
  for (Index k = 0; k < K; ++k) any_active |= !inactive[static_cast<std::size_t>(k)];
  if (!any_active) {
    out.degenerate = true;
    out.report.status = SolverStatus::converged;
    return out;
  }

  Vector flat = flatten(d0);
  out.report.status = SolverStatus::converged;
  for (int pass = 0; pass < passes; ++pass) {
    for (Index k = 0; k < K; ++k) {
      if (inactive[static_cast<std::size_t>(k)]) {
        out.dual.beta[k] = 0.0;
        continue;
      }
      // rhs of the residual problem: b_k - sum_{k2 != k} G_{k,k2} d_k2.
      Vector residual_rhs = sys.rhs.segment(k * L, L);
      for (Index k2 = 0; k2 < K; ++k2) {
        if (k2 == k) continue;
        residual_rhs -= sys.gram.block(k * L, k2 * L, L, L) * flat.segment(k2 * L, L);
      }
      const Eigen::MatrixXd block = sys.gram.block(k * L, k * L, L, L);
      Vector beta0(1);
      beta0[0] = out.dual.beta[k];
      DualSolve sol = solve_dual(block, residual_rhs, 1, L, beta0, options);
      Vector candidate = sol.d;
      const double norm = candidate.norm();
      if (norm > 1.0) candidate /= norm;

      const Vector current = flat.segment(k * L, L);
      auto block_cost = [&](const Vector& v) {
        return v.dot(block * v) - 2.0 * residual_rhs.dot(v);
      };
      if (current.norm() > 1.0 + 1e-9 || block_cost(candidate) <= block_cost(current)) {
        flat.segment(k * L, L) = candidate;
      }
      out.dual.beta[k] = sol.beta[0];
      out.report.iterations += sol.report.iterations;
      out.report.evaluations += sol.report.evaluations;
      out.report.projected_grad_norm =
          std::max(out.report.projected_grad_norm, sol.report.projected_grad_norm);
      if (sol.report.status != SolverStatus::converged) out.report.status = sol.report.status;
    }
  }
  out.dict = unflatten(flat, K, L);
  out.report.objective = sys.data_term(flat);
  return out;
}

AtomUpdate update_atoms(const TrialSet& x, const ActivationSet& z, const WeightField& w,
                        const Dictionary& d0, const AtomUpdateOptions& options) {
  check_dims(x, d0, z);
  const std::vector<bool> inactive = inactive_atoms(z);
  if (std::all_of(inactive.begin(), inactive.end(), [](bool b) { return b; })) {
    AtomUpdate out{d0, DualVars{Vector::Zero(d0.n_atoms())}, {}, true, inactive};
    out.report.status = SolverStatus::converged;
    return out;
  }
  return solve_atoms_joint(build_atom_system(x, z, w), d0, inactive, options);
}

AtomUpdate update_atoms_bcd(const TrialSet& x, const ActivationSet& z, const WeightField& w,
                            const Dictionary& d0, int passes, const AtomUpdateOptions& options) {
  check_dims(x, d0, z);
  const std::vector<bool> inactive = inactive_atoms(z);
  if (std::all_of(inactive.begin(), inactive.end(), [](bool b) { return b; })) {
    AtomUpdate out{d0, DualVars{Vector::Zero(d0.n_atoms())}, {}, true, inactive};
    out.report.status = SolverStatus::converged;
    return out;
  }
  return solve_atoms_bcd(build_atom_system(x, z, w), d0, inactive, passes, options);
}

void mstep_iteration(const TrialSet& x, const WeightField& w, double lambda, Dictionary& dict,
                     ActivationSet& z, MStepState& state, const MStepOptions& options) {
  check_dims(x, dict, z);
  const Index N = x.n_trials();
  const Index KP = z.n_atoms() * z.n_shifts();
  ZUpdateOptions zo{options.z_solver, options.z_tol, options.z_max_iter, false, options.z_ftol};
  std::vector<int> iterations(static_cast<std::size_t>(N), 0);
  const Vector zeros = Vector::Zero(KP);
  parallel_for(N, options.jobs, [&](Index n) {
    std::span<const double> start =
        options.warm_start ? std::span<const double>(z.trial(n))
                           : std::span<const double>(zeros.data(), static_cast<std::size_t>(KP));
    BoxResult res = update_activations(x.trial(n), dict, w.trial(n), lambda, start, zo);
    auto row = z.trial(n);
    std::copy(res.x.data(), res.x.data() + KP, row.begin());
    iterations[static_cast<std::size_t>(n)] = res.report.iterations;
  });
  for (int it : iterations) state.z_iterations += it;

  AtomUpdateOptions ao;
  ao.tol = options.d_tol;
  ao.max_iter = options.d_max_iter;
  if (options.warm_start) ao.beta0 = state.dual.beta;
  AtomUpdate upd = options.d_solver == DSolver::joint
                       ? update_atoms(x, z, w, dict, ao)
                       : update_atoms_bcd(x, z, w, dict, options.bcd_passes, ao);
  state.d_iterations += upd.report.iterations;
  dict = std::move(upd.dict);
  if (!upd.degenerate) state.dual = std::move(upd.dual);
}

}  // namespace acsc
