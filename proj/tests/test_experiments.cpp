#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "acsc/experiments.hpp"
#include "oracles.hpp"

using namespace acsc;

namespace {

Matrix unit_rows(Matrix m) {
  for (Index k = 0; k < m.rows(); ++k) m.row(k).normalize();
  return m;
}

double row_variance(const Matrix& m, Index n) {
  const double mean = m.row(n).mean();
  return (m.row(n).array() - mean).square().mean();
}

Matrix circular_shift(const Matrix& atoms, Index k, Index s) {
  Matrix out = atoms;
  const Index L = atoms.cols();
  for (Index i = 0; i < L; ++i) out(k, i) = atoms(k, ((i - s) % L + L) % L);
  return out;
}

}  // namespace

TEST_CASE("noiseless synthetic data is the reconstruction of the truth") {
  Rng rng(1);
  const SyntheticData s = generate_synthetic(6, 80, 3, 10, 0.0, rng);
  const Matrix xh = reconstruct_all(s.truth.dictionary, s.truth.activations);
  CHECK(s.trials.data() == xh);
  CHECK(s.truth.noise_std == 0.0);
  CHECK(s.truth.corrupted == std::vector<bool>(6, false));
}

TEST_CASE("synthetic atoms are zero-mean and unit-norm with one activation per atom") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Index N = 5, T = 120, K = 3, L = 16, P = T - L + 1;
    const SyntheticData s = generate_synthetic(N, T, K, L, 0.1, rng);
    for (Index k = 0; k < K; ++k) {
      CHECK(std::abs(s.truth.dictionary.atoms().row(k).mean()) <= 1e-12);
      CHECK(std::abs(s.truth.dictionary.atoms().row(k).norm() - 1.0) <= 1e-12);
    }
    for (Index n = 0; n < N; ++n) {
      for (Index k = 0; k < K; ++k) {
        const auto a = s.truth.activations.atom(n, k);
        REQUIRE(static_cast<Index>(a.size()) == P);
        int nonzero = 0;
        for (double v : a) {
          if (v != 0.0) {
            ++nonzero;
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
          }
        }
        CHECK(nonzero == 1);
      }
    }
  }
}

TEST_CASE("synthetic noise has the requested spread") {
  Rng rng(2);
  const SyntheticData s = generate_synthetic(40, 500, 2, 20, 0.3, rng);
  const Matrix noise = s.trials.data() - reconstruct_all(s.truth.dictionary, s.truth.activations);
  const double var = noise.array().square().mean();
  CHECK(std::abs(std::sqrt(var) - 0.3) < 0.01);
}

TEST_CASE("synthetic generation validates dimensions") {
  Rng rng(3);
  CHECK_THROWS_AS(generate_synthetic(2, 10, 1, 11, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic(0, 10, 1, 4, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic(2, 10, 1, 4, -1.0, rng), std::invalid_argument);
}

TEST_CASE("corruption edge fractions") {
  Rng rng(4);
  const TrialSet x(oracle::random_matrix(7, 30, rng));
  const Corruption none = corrupt_trials(x, 0.0, 1.0, rng);
  CHECK(none.trials.data() == x.data());
  CHECK(std::count(none.mask.begin(), none.mask.end(), true) == 0);
  const Corruption all = corrupt_trials(x, 1.0, 1.0, rng);
  CHECK(std::count(all.mask.begin(), all.mask.end(), true) == 7);
  for (Index n = 0; n < 7; ++n) CHECK(all.trials.data().row(n) != x.data().row(n));
  CHECK_THROWS_AS(corrupt_trials(x, 1.5, 1.0, rng), std::invalid_argument);
}

TEST_CASE("ten percent corruption hits exactly ten trials with separated variance") {
  Rng rng(5);
  const SyntheticData s = generate_synthetic(100, 256, 2, 32, 0.01, rng);
  const Corruption c = corrupt_trials(s.trials, 0.1, 0.1, rng);
  CHECK(std::count(c.mask.begin(), c.mask.end(), true) == 10);
  double clean = 0.0, dirty = 0.0;
  for (Index n = 0; n < 100; ++n) {
    const bool hit = c.mask[static_cast<std::size_t>(n)];
    const double v = row_variance(c.trials.data(), n);
    (hit ? dirty : clean) += v;
    const Matrix added = c.trials.data().row(n) - s.trials.data().row(n);
    if (hit) {
      CHECK(std::abs(std::sqrt(added.array().square().mean()) - 0.1) < 0.03);
    } else {
      CHECK(added.isZero(0.0));
    }
  }
  CHECK(dirty / 10.0 > clean / 90.0);
}

TEST_CASE("atom distance is zero under alignment symmetries") {
  Rng rng(6);
  const Matrix truth = unit_rows(oracle::random_matrix(3, 12, rng));
  CHECK(atom_distance(Dictionary(truth), Dictionary(truth)) == 0.0);
  Matrix est(3, 12);
  est.row(0) = truth.row(2);
  est.row(1) = -truth.row(0);
  est.row(2) = truth.row(1);
  CHECK(atom_distance(Dictionary(est), Dictionary(truth)) == 0.0);
  const Alignment a = align_atoms(Dictionary(est), Dictionary(truth));
  CHECK(a.match == std::vector<Index>{1, 2, 0});
  CHECK(a.sign == std::vector<int>{-1, 1, 1});
  const Matrix shifted = circular_shift(truth, 1, 3);
  CHECK(atom_distance(Dictionary(shifted), Dictionary(truth)) <= 1e-15);
}

TEST_CASE("atom distance matches exhaustive alignment search") {
  Rng rng(7);
  // Copies offset by 2 with zero fill, so no shift aligns them exactly.
  const Matrix truth = unit_rows(oracle::random_matrix(2, 8, rng));
  Matrix est = truth;
  for (Index k = 0; k < 2; ++k) {
    for (Index i = 0; i < 8; ++i) est(k, i) = i >= 2 ? truth(k, i - 2) : 0.0;
  }
  CHECK(std::abs(atom_distance(Dictionary(est), Dictionary(truth)) -
                 oracle::brute_force_distance(est, truth)) <= 1e-12);
  for (int rep = 0; rep < 50; ++rep) {
    const Index K = 1 + static_cast<Index>(rng.uniform() * 3.0);
    const Index L = 3 + static_cast<Index>(rng.uniform() * 8.0);
    const Matrix a = oracle::random_matrix(K, L, rng);
    const Matrix b = oracle::random_matrix(K, L, rng);
    CHECK(std::abs(atom_distance(Dictionary(a), Dictionary(b)) - oracle::brute_force_distance(a, b)) <=
          1e-12);
  }
}

TEST_CASE("atom distance behaves as a pseudo-metric") {
  Rng rng(8);
  for (int rep = 0; rep < 100; ++rep) {
    const Dictionary a(oracle::random_matrix(2, 6, rng));
    const Dictionary b(oracle::random_matrix(2, 6, rng));
    CHECK(atom_distance(a, b) == doctest::Approx(atom_distance(b, a)).epsilon(1e-12));
    CHECK(atom_distance(a, a) == 0.0);
  }
  // The triangle inequality for whole-atom rigid alignments holds when every
  // atom is aligned by the same kind of transform; check it on perturbations
  // of a common base, where the optimal alignments are all the identity.
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix base = unit_rows(oracle::random_matrix(2, 16, rng));
    const Dictionary a(base + oracle::random_matrix(2, 16, rng, 0.02));
    const Dictionary b(base + oracle::random_matrix(2, 16, rng, 0.02));
    const Dictionary c(base + oracle::random_matrix(2, 16, rng, 0.02));
    CHECK(atom_distance(a, c) <= atom_distance(a, b) + atom_distance(b, c) + 1e-12);
  }
  CHECK_THROWS_AS(atom_distance(Dictionary(Matrix::Ones(2, 4)), Dictionary(Matrix::Ones(2, 5))),
                  std::invalid_argument);
}

TEST_CASE("time to precision is the first time within the target") {
  BenchRecord r;
  r.times = {0.0, 1.0, 2.0, 3.0, 4.0};
  r.objectives = {10.0, 2.0, 1.015, 1.005, 1.0};
  CHECK(time_to_precision(r, 0.01) == 3.0);
  CHECK(time_to_precision(r, 0.02) == 2.0);
  CHECK(time_to_precision(r, 0.0) == 4.0);
  r.objectives = {10.0, 2.0, 1.015, 1.005, 1.0};
  r.times.pop_back();
  CHECK_THROWS_AS(time_to_precision(r, 0.01), std::invalid_argument);
}

TEST_CASE("benchmark rejects an empty solver list") {
  CHECK_THROWS_WITH_AS(run_benchmark({BenchSetting{}}, {}, BenchOptions{}), "no solvers registered",
                       std::invalid_argument);
}

TEST_CASE("benchmark curves and summaries") {
  BenchSetting s;
  s.n_atoms = 2;
  s.atom_len = 8;
  s.trial_len = 64;
  s.n_trials = 3;
  BenchOptions o;
  o.n_seeds = 2;
  o.max_iters = 30;
  const std::vector<BenchSolver> solvers{{"qn", ZSolver::lbfgsb, DSolver::joint},
                                         {"qn-copy", ZSolver::lbfgsb, DSolver::joint},
                                         {"fista-bcd", ZSolver::fista, DSolver::bcd}};
  const BenchReport rep = run_benchmark({s}, solvers, o);
  REQUIRE(rep.records.size() == 6);
  REQUIRE(rep.summary.size() == 3);
  for (const BenchRecord& r : rep.records) {
    REQUIRE(r.times.size() == r.objectives.size());
    for (std::size_t i = 1; i < r.times.size(); ++i) {
      CHECK(r.times[i] >= r.times[i - 1]);
      CHECK(r.objectives[i] <= r.objectives[i - 1] + 1e-10);
    }
  }
  // Identical registrations see identical problems and iterates; only the
  // clock readings differ.
  for (std::size_t seed = 0; seed < 2; ++seed) {
    CHECK(rep.records[seed].objectives == rep.records[2 + seed].objectives);
    CHECK(rep.records[seed].converged == rep.records[2 + seed].converged);
  }
  CHECK(rep.summary[0].runs == rep.summary[1].runs);
  CHECK(rep.summary[0].reached == rep.summary[1].reached);
  CHECK(rep.summary[0].note == rep.summary[1].note);
  // Recomputing from the raw records reproduces the summary exactly.
  const auto again = summarize(rep.records, {s}, solvers, o.target_precision);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(again[i].reached == rep.summary[i].reached);
    if (again[i].reached > 0) CHECK(again[i].time_to_target == rep.summary[i].time_to_target);
  }
}

TEST_CASE("summary excludes non-converged runs with a note") {
  BenchSetting s;
  const std::vector<BenchSolver> solvers{{"a", ZSolver::lbfgsb, DSolver::joint}};
  std::vector<BenchRecord> recs(3);
  for (auto& r : recs) {
    r.solver = "a";
    r.times = {0.0, 2.0};
    r.objectives = {2.0, 1.0};
    r.converged = true;
  }
  recs[1].converged = false;
  recs[2].times = {0.0, 8.0};
  const auto rows = summarize(recs, {s}, solvers, 0.01);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].runs == 3);
  CHECK(rows[0].reached == 2);
  CHECK(rows[0].time_to_target == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(rows[0].note.find("1 of 3") != std::string::npos);
}

TEST_CASE("z-subproblem solvers reach a common optimum") {
  BenchSetting s;
  s.n_atoms = 2;
  s.atom_len = 16;
  s.trial_len = 128;
  s.n_trials = 2;
  BenchOptions o;
  o.mode = BenchMode::z_subproblem;
  o.n_seeds = 5;
  o.inner_tol = 1e-10;
  o.inner_max_iter = 100000;
  const std::vector<BenchSolver> solvers{{"lbfgsb", ZSolver::lbfgsb, DSolver::joint},
                                         {"ista", ZSolver::ista, DSolver::joint},
                                         {"fista", ZSolver::fista, DSolver::joint}};
  const BenchReport rep = run_benchmark({s}, solvers, o);
  for (int seed = 0; seed < 5; ++seed) {
    std::vector<double> finals;
    for (std::size_t v = 0; v < 3; ++v) finals.push_back(rep.records[v * 5 + seed].objectives.back());
    const auto [lo, hi] = std::minmax_element(finals.begin(), finals.end());
    CHECK((*hi - *lo) <= 1e-6 * std::abs(*lo));
  }
}
