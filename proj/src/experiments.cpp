#include "acsc/experiments.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "acsc/error.hpp"
#include "acsc/parallel.hpp"
#include "acsc/solver.hpp"

namespace acsc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

SyntheticData generate_synthetic(Index n_trials, Index trial_len, Index n_atoms, Index atom_len,
                                 double noise_std, Rng& rng) {
  require(n_trials >= 1 && n_atoms >= 1 && atom_len >= 2, "generate_synthetic: invalid dims");
  require(atom_len <= trial_len, "generate_synthetic: atom_len must not exceed trial_len");
  require(noise_std >= 0.0 && std::isfinite(noise_std), "generate_synthetic: invalid noise_std");

  constexpr double two_pi = 2.0 * std::numbers::pi;
  Matrix atoms(n_atoms, atom_len);
  for (Index k = 0; k < n_atoms; ++k) {
    const double periods = 1.0 + 2.0 * rng.uniform();
    const double phase = two_pi * rng.uniform();
    for (Index i = 0; i < atom_len; ++i) {
      const double s = std::sin(two_pi * periods * static_cast<double>(i) /
                                static_cast<double>(atom_len) + phase);
      switch (k % 3) {
        case 0: atoms(k, i) = s; break;
        case 1: atoms(k, i) = s >= 0.0 ? 1.0 : -1.0; break;
        default: atoms(k, i) = 2.0 / std::numbers::pi * std::asin(s); break;
      }
    }
    atoms.row(k).array() -= atoms.row(k).mean();
    atoms.row(k) /= atoms.row(k).norm();
  }

  const Index P = trial_len - atom_len + 1;
  ActivationSet z(n_trials, n_atoms, P);
  for (Index n = 0; n < n_trials; ++n) {
    auto row = z.trial(n);
    for (Index k = 0; k < n_atoms; ++k) {
      const auto instant = static_cast<Index>(rng.below(static_cast<std::uint64_t>(P)));
      row[static_cast<std::size_t>(k * P + instant)] = rng.uniform_open();
    }
  }

  SyntheticTruth truth{Dictionary(std::move(atoms)), std::move(z),
                       std::vector<bool>(static_cast<std::size_t>(n_trials), false), noise_std};
  Matrix x = reconstruct_all(truth.dictionary, truth.activations);
  for (Index n = 0; n < n_trials; ++n) {
    for (Index t = 0; t < trial_len; ++t) x(n, t) += noise_std * rng.normal();
  }
  return {TrialSet(std::move(x)), std::move(truth)};
}

Corruption corrupt_trials(const TrialSet& x, double fraction, double noise_std, Rng& rng) {
  require(fraction >= 0.0 && fraction <= 1.0, "corrupt_trials: fraction must lie in [0, 1]");
  require(noise_std >= 0.0 && std::isfinite(noise_std), "corrupt_trials: invalid noise_std");
  const Index N = x.n_trials();
  const auto count = static_cast<Index>(std::floor(fraction * static_cast<double>(N) + 1e-9));

  std::vector<Index> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index i = 0; i < count; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(N - i)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  std::vector<bool> mask(static_cast<std::size_t>(N), false);
  for (Index i = 0; i < count; ++i) mask[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;

  Matrix data = x.data();
  for (Index n = 0; n < N; ++n) {
    if (!mask[static_cast<std::size_t>(n)]) continue;
    for (Index t = 0; t < x.trial_len(); ++t) data(n, t) += noise_std * rng.normal();
  }
  return {TrialSet(std::move(data)), std::move(mask)};
}

Alignment align_atoms(const Dictionary& estimated, const Dictionary& truth) {
  require(estimated.n_atoms() == truth.n_atoms() && estimated.atom_len() == truth.atom_len(),
          "atom_distance: dictionaries have different shapes");
  const Index K = truth.n_atoms();
  const Index L = truth.atom_len();
  require(K <= 20, "atom_distance: at most 20 atoms are supported");

  struct Pair {
    double cost;
    int sign;
    Index shift;
  };
  std::vector<Pair> pairs(static_cast<std::size_t>(K * K));
  for (Index kt = 0; kt < K; ++kt) {
    const auto d_true = truth.atoms().row(kt);
    for (Index ke = 0; ke < K; ++ke) {
      const auto d_est = estimated.atoms().row(ke);
      Pair best{std::numeric_limits<double>::infinity(), 1, 0};
      for (Index s = -(L / 2); s <= L / 2; ++s) {
        for (int sign : {1, -1}) {
          double sq = 0.0;
          for (Index i = 0; i < L; ++i) {
            const double diff = sign * d_est[((i - s) % L + L) % L] - d_true[i];
            sq += diff * diff;
          }
          const double cost = std::sqrt(sq);
          if (cost < best.cost) best = {cost, sign, s};
        }
      }
      pairs[static_cast<std::size_t>(kt * K + ke)] = best;
    }
  }

  // dp[mask]: best total for the first popcount(mask) truth atoms matched to
  // the estimated atoms in mask.
  const std::size_t full = std::size_t{1} << K;
  std::vector<double> dp(full, std::numeric_limits<double>::infinity());
  std::vector<int> choice(full, -1);
  dp[0] = 0.0;
  for (std::size_t mask = 0; mask < full; ++mask) {
    if (!std::isfinite(dp[mask])) continue;
    const int kt = std::popcount(mask);
    if (kt >= K) continue;
    for (Index ke = 0; ke < K; ++ke) {
      const std::size_t bit = std::size_t{1} << ke;
      if (mask & bit) continue;
      const double v = dp[mask] + pairs[static_cast<std::size_t>(kt * K + ke)].cost;
      if (v < dp[mask | bit]) {
        dp[mask | bit] = v;
        choice[mask | bit] = static_cast<int>(ke);
      }
    }
  }

  Alignment out;
  out.per_atom.resize(static_cast<std::size_t>(K));
  out.match.resize(static_cast<std::size_t>(K));
  out.sign.resize(static_cast<std::size_t>(K));
  out.shift.resize(static_cast<std::size_t>(K));
  std::size_t mask = full - 1;
  for (Index kt = K - 1; kt >= 0; --kt) {
    const int ke = choice[mask];
    const Pair& p = pairs[static_cast<std::size_t>(kt * K + ke)];
    out.per_atom[static_cast<std::size_t>(kt)] = p.cost;
    out.match[static_cast<std::size_t>(kt)] = ke;
    out.sign[static_cast<std::size_t>(kt)] = p.sign;
    out.shift[static_cast<std::size_t>(kt)] = p.shift;
    mask &= ~(std::size_t{1} << ke);
  }
  out.distance = dp[full - 1] / static_cast<double>(K);
  return out;
}

double atom_distance(const Dictionary& estimated, const Dictionary& truth) {
  return align_atoms(estimated, truth).distance;
}

double time_to_precision(const BenchRecord& record, double target) {
  require(!record.objectives.empty() && record.objectives.size() == record.times.size(),
          "time_to_precision: malformed record");
  const double best = *std::min_element(record.objectives.begin(), record.objectives.end());
  const double scale = std::max(std::abs(best), std::numeric_limits<double>::min());
  for (std::size_t i = 0; i < record.objectives.size(); ++i) {
    if ((record.objectives[i] - best) / scale <= target) return record.times[i];
  }
  return kNaN;
}

namespace {

BenchRecord run_mstep_cell(const BenchSetting& s, const BenchSolver& solver, std::uint64_t seed,
                           std::size_t setting_index, const BenchOptions& o) {
  Rng data_rng = derive_stream(o.seed, StreamTag::benchmark, seed, setting_index);
  const SyntheticData data =
      generate_synthetic(s.n_trials, s.trial_len, s.n_atoms, s.atom_len, o.noise_std, data_rng);
  Rng init_rng = derive_stream(o.seed, StreamTag::dictionary_init, seed, setting_index);
  Dictionary dict = init_dictionary(s.n_atoms, s.atom_len, "gaussian-white", init_rng);
  ActivationSet z(s.n_trials, s.n_atoms, s.trial_len - s.atom_len + 1);
  const WeightField w = WeightField::constant(s.n_trials, s.trial_len, 0.5);

  MStepOptions mo;
  mo.z_solver = solver.z_solver;
  mo.d_solver = solver.d_solver;
  mo.z_tol = mo.d_tol = o.inner_tol;
  mo.z_max_iter = mo.d_max_iter = o.inner_max_iter;
  MStepState state;

  BenchRecord rec{solver.name, s, seed, {0.0}, {}, false};
  rec.objectives.push_back(weighted_objective(data.trials, dict, z, w, s.lambda));
  double elapsed = 0.0;
  for (int it = 0; it < o.max_iters; ++it) {
    const auto t0 = Clock::now();
    mstep_iteration(data.trials, w, s.lambda, dict, z, state, mo);
    elapsed += seconds_since(t0);
    const double f = weighted_objective(data.trials, dict, z, w, s.lambda);
    const double previous = rec.objectives.back();
    rec.times.push_back(elapsed);
    rec.objectives.push_back(f);
    if (previous - f <= o.stop_tol * std::max(std::abs(f), 1e-300)) {
      rec.converged = true;
      break;
    }
  }
  return rec;
}

BenchRecord run_z_cell(const BenchSetting& s, const BenchSolver& solver, std::uint64_t seed,
                       std::size_t setting_index, const BenchOptions& o) {
  Rng data_rng = derive_stream(o.seed, StreamTag::benchmark, seed, setting_index);
  const SyntheticData data =
      generate_synthetic(s.n_trials, s.trial_len, s.n_atoms, s.atom_len, o.noise_std, data_rng);
  const Dictionary& dict = data.truth.dictionary;
  const Index KP = s.n_atoms * (s.trial_len - s.atom_len + 1);
  const WeightField w = WeightField::constant(s.n_trials, s.trial_len, 0.5);
  const Vector zeros = Vector::Zero(KP);

  // Total objective over trials while they are solved one after another.
  std::vector<double> per_trial(static_cast<std::size_t>(s.n_trials));
  for (Index n = 0; n < s.n_trials; ++n) {
    per_trial[static_cast<std::size_t>(n)] =
        trial_objective(data.trials.trial(n), dict, {zeros.data(), static_cast<std::size_t>(KP)},
                        w.trial(n), s.lambda);
  }
  BenchRecord rec{solver.name, s, seed, {0.0}, {}, true};
  double total = std::accumulate(per_trial.begin(), per_trial.end(), 0.0);
  rec.objectives.push_back(total);
  double offset = 0.0;
  ZUpdateOptions zo{solver.z_solver, o.inner_tol, o.inner_max_iter, true};
  for (Index n = 0; n < s.n_trials; ++n) {
    const BoxResult res = update_activations(data.trials.trial(n), dict, w.trial(n), s.lambda,
                                             {zeros.data(), static_cast<std::size_t>(KP)}, zo);
    const double before = total - per_trial[static_cast<std::size_t>(n)];
    const auto& tr = res.report;
    for (std::size_t i = 1; i < tr.objective_trace.size(); ++i) {
      rec.times.push_back(offset + tr.time_trace[i]);
      rec.objectives.push_back(before + tr.objective_trace[i]);
    }
    offset += tr.time_trace.empty() ? 0.0 : tr.time_trace.back();
    total = before + res.report.objective;
    per_trial[static_cast<std::size_t>(n)] = res.report.objective;
    rec.converged = rec.converged && tr.status == SolverStatus::converged;
  }
  return rec;
}

}  // namespace

std::vector<BenchSummaryRow> summarize(const std::vector<BenchRecord>& records,
                                       const std::vector<BenchSetting>& settings,
                                       const std::vector<BenchSolver>& solvers, double target) {
  std::vector<BenchSummaryRow> rows;
  const std::size_t per_cell = solvers.empty() || settings.empty()
                                   ? 0
                                   : records.size() / (settings.size() * solvers.size());
  for (std::size_t si = 0; si < settings.size(); ++si) {
    for (std::size_t vi = 0; vi < solvers.size(); ++vi) {
      BenchSummaryRow row{solvers[vi].name, settings[si], 0, 0, kNaN, ""};
      double log_sum = 0.0;
      int skipped = 0;
      for (std::size_t r = 0; r < per_cell; ++r) {
        const BenchRecord& rec = records[(si * solvers.size() + vi) * per_cell + r];
        ++row.runs;
        if (!rec.converged) {
          ++skipped;
          continue;
        }
        const double t = time_to_precision(rec, target);
        if (std::isnan(t)) continue;
        ++row.reached;
        log_sum += std::log(t);
      }
      if (row.reached > 0) row.time_to_target = std::exp(log_sum / row.reached);
      if (skipped > 0) {
        row.note = std::to_string(skipped) + " of " + std::to_string(row.runs) +
                   " runs did not converge and were excluded";
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

BenchReport run_benchmark(const std::vector<BenchSetting>& settings,
                          const std::vector<BenchSolver>& solvers, const BenchOptions& options) {
  require(!solvers.empty(), "no solvers registered");
  require(!settings.empty(), "no benchmark settings");
  require(options.n_seeds >= 1, "run_benchmark: n_seeds must be >= 1");
  require(options.target_precision > 0.0, "run_benchmark: target precision must be positive");
  for (const auto& s : settings) {
    require(s.n_atoms >= 1 && s.atom_len >= 2 && s.atom_len <= s.trial_len && s.n_trials >= 1 &&
                s.lambda > 0.0,
            "run_benchmark: invalid setting");
  }

  const auto n_seeds = static_cast<std::size_t>(options.n_seeds);
  const std::size_t cells = settings.size() * solvers.size() * n_seeds;
  BenchReport report;
  report.records.resize(cells);
  parallel_for(static_cast<Index>(cells), options.jobs, [&](Index c) {
    const auto cell = static_cast<std::size_t>(c);
    const std::size_t seed = cell % n_seeds;
    const std::size_t vi = (cell / n_seeds) % solvers.size();
    const std::size_t si = cell / (n_seeds * solvers.size());
    report.records[cell] =
        options.mode == BenchMode::mstep
            ? run_mstep_cell(settings[si], solvers[vi], seed, si, options)
            : run_z_cell(settings[si], solvers[vi], seed, si, options);
  });
  report.summary = summarize(report.records, settings, solvers, options.target_precision);
  return report;
}

}  // namespace acsc
