#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "acsc/core.hpp"
#include "oracles.hpp"

using namespace acsc;

namespace {

std::span<const double> span_of(const std::vector<double>& v) { return {v.data(), v.size()}; }

}  // namespace

TEST_CASE("reconstruct places a delta-activated atom at its instant") {
  Matrix atoms(1, 4);
  atoms << 1.0, -2.0, 3.0, 0.5;
  const Dictionary d(atoms);
  std::vector<double> z(13, 0.0);  // T = 16, L = 4
  z[5] = 1.0;
  const Vector out = reconstruct(d, span_of(z));
  REQUIRE(out.size() == 16);
  for (Index t = 0; t < 16; ++t) {
    const double expected = (t >= 5 && t < 9) ? atoms(0, t - 5) : 0.0;
    CHECK(out[t] == expected);
  }
}

TEST_CASE("reconstruct of zero activations is zero") {
  Rng rng(1);
  const Dictionary d(oracle::random_matrix(3, 5, rng));
  const std::vector<double> z(3 * 12, 0.0);
  CHECK(reconstruct(d, span_of(z)).isZero(0.0));
}

TEST_CASE("reconstruct matches the triple-loop convolution") {
  Rng rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix atoms = oracle::random_matrix(2, 4, rng);
    const Matrix z = oracle::random_activations(1, 2 * 13, 0.4, rng);
    const auto zn = oracle::row(z, 0);
    const Vector fast = reconstruct(Dictionary(atoms), span_of(zn));
    const Vector slow = oracle::reconstruct(atoms, zn);
    CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("reconstruct rejects activations that do not split into K blocks") {
  Rng rng(3);
  const Dictionary d(oracle::random_matrix(2, 3, rng));
  const std::vector<double> z(7, 0.0);
  CHECK_THROWS_AS(reconstruct(d, span_of(z)), std::invalid_argument);
}

TEST_CASE("reconstruct is linear in nonnegative combinations of activations") {
  Rng rng(4);
  const Dictionary d(oracle::random_matrix(2, 6, rng));
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix z1 = oracle::random_activations(1, 2 * 40, 0.2, rng);
    const Matrix z2 = oracle::random_activations(1, 2 * 40, 0.2, rng);
    const double a = rng.uniform(), b = rng.uniform();
    const Matrix combo = a * z1 + b * z2;
    const auto c = oracle::row(combo, 0), v1 = oracle::row(z1, 0), v2 = oracle::row(z2, 0);
    const Vector lhs = reconstruct(d, span_of(c));
    const Vector rhs = a * reconstruct(d, span_of(v1)) + b * reconstruct(d, span_of(v2));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("correlate_valid is the adjoint of one-atom convolution") {
  Rng rng(5);
  const Matrix atom = oracle::random_matrix(1, 7, rng);
  const Matrix sig = oracle::random_matrix(1, 30, rng);
  std::vector<double> out(24);
  correlate_valid({atom.data(), 7}, {sig.data(), 30}, {out.data(), out.size()});
  for (Index u = 0; u < 24; ++u) {
    double ref = 0.0;
    for (Index i = 0; i < 7; ++i) ref += atom(0, i) * sig(0, u + i);
    CHECK(out[static_cast<std::size_t>(u)] == doctest::Approx(ref).epsilon(1e-13));
  }
}

TEST_CASE("weighted objective with w = 1/2 is the plain CSC cost") {
  Rng rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    const Index N = 3, T = 20, K = 2, L = 5, P = T - L + 1;
    const Matrix x = oracle::random_matrix(N, T, rng);
    const Matrix atoms = oracle::random_matrix(K, L, rng);
    const Matrix z = oracle::random_activations(N, K * P, 0.3, rng);
    const double lambda = 0.1 + rng.uniform();
    double csc = 0.0;
    for (Index n = 0; n < N; ++n) {
      const Vector xh = oracle::reconstruct(atoms, oracle::row(z, n));
      csc += 0.5 * (x.row(n).transpose() - xh).squaredNorm() + lambda * z.row(n).sum();
    }
    const double got = weighted_objective(TrialSet(x), Dictionary(atoms), ActivationSet(K, z),
                                          WeightField::constant(N, T, 0.5), lambda);
    CHECK(std::abs(got - csc) <= 1e-12 * std::abs(csc));
  }
}

TEST_CASE("weighted objective at z = 0 is the weighted energy") {
  Rng rng(7);
  const Matrix x = oracle::random_matrix(2, 9, rng);
  const Matrix w = oracle::random_weights(2, 9, rng);
  const double got = weighted_objective(TrialSet(x), Dictionary(oracle::random_matrix(1, 3, rng)),
                                        ActivationSet(2, 1, 7), WeightField(w), 0.7);
  const double expected = (w.array() * x.array().square()).sum();
  CHECK(got == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("weighted objective matches the scalar-loop reference") {
  Rng rng(8);
  const Index N = 2, T = 8, K = 1, L = 3;
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix x = oracle::random_matrix(N, T, rng);
    const Matrix atoms = oracle::random_matrix(K, L, rng);
    const Matrix z = oracle::random_activations(N, K * (T - L + 1), 0.5, rng);
    const Matrix w = oracle::random_weights(N, T, rng);
    const double ref = oracle::objective(x, atoms, z, w, 0.3);
    const double got = weighted_objective(TrialSet(x), Dictionary(atoms), ActivationSet(K, z),
                                          WeightField(w), 0.3);
    CHECK(std::abs(got - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("weighted objective validates its inputs") {
  Rng rng(9);
  const TrialSet x(oracle::random_matrix(2, 10, rng));
  const Dictionary d(oracle::random_matrix(1, 3, rng));
  CHECK_THROWS_AS(weighted_objective(x, d, ActivationSet(2, 1, 5), WeightField::constant(2, 10, 0.5), 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(WeightField(Matrix::Constant(2, 10, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(WeightField(Matrix::Constant(2, 10, -1.0)), std::invalid_argument);
}

TEST_CASE("project_unit_ball rescales long atoms only") {
  Matrix atoms = Matrix::Zero(3, 4);
  atoms.row(0) << 2.0, 0.0, 0.0, 0.0;
  atoms.row(1) << 0.0, 0.5, 0.0, 0.0;
  // row 2 stays zero
  const ProjectedDictionary p = project_unit_ball(Dictionary(atoms));
  CHECK(p.scales[0] == 2.0);
  CHECK(p.scales[1] == 1.0);
  CHECK(p.scales[2] == 1.0);
  CHECK(p.dict.atoms().row(0).norm() == doctest::Approx(1.0));
  CHECK(p.dict.atoms().row(1).norm() == 0.5);
  CHECK(p.dict.atoms().row(2).isZero(0.0));
}

TEST_CASE("projection plus activation rescaling preserves reconstructions") {
  Rng rng(10);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix atoms = oracle::random_matrix(3, 6, rng);
    const Matrix zm = oracle::random_activations(2, 3 * 15, 0.3, rng);
    const Dictionary d(atoms);
    const ActivationSet z(3, zm);
    const ProjectedDictionary p = project_unit_ball(d);
    CHECK(p.dict.is_feasible(1e-12));
    const ActivationSet zs = rescale_activations(z, p.scales);
    const Matrix before = reconstruct_all(d, z);
    const Matrix after = reconstruct_all(p.dict, zs);
    CHECK((before - after).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("objective is unchanged by projection when atoms are already feasible") {
  Rng rng(11);
  Matrix atoms = oracle::random_matrix(2, 5, rng);
  for (Index k = 0; k < 2; ++k) atoms.row(k) *= 0.9 / atoms.row(k).norm();
  const Matrix x = oracle::random_matrix(2, 20, rng);
  const ActivationSet z(2, oracle::random_activations(2, 2 * 16, 0.3, rng));
  const WeightField w(oracle::random_weights(2, 20, rng));
  const Dictionary d(atoms);
  const ProjectedDictionary p = project_unit_ball(d);
  const double a = weighted_objective(TrialSet(x), d, z, w, 0.2);
  const double b = weighted_objective(TrialSet(x), p.dict, rescale_activations(z, p.scales), w, 0.2);
  CHECK(a == b);
}

TEST_CASE("triplets round-trip the dense activations") {
  Rng rng(12);
  const ActivationSet z(2, oracle::random_activations(3, 2 * 10, 0.3, rng));
  const auto tr = to_triplets(z);
  const ActivationSet back = from_triplets(3, 2, 10, tr);
  CHECK(back.values() == z.values());
  std::vector<Triplet> bad{{0, 0, 10, 1.0}};
  CHECK_THROWS_AS(from_triplets(3, 2, 10, bad), std::invalid_argument);
}

TEST_CASE("domain types reject invalid contents") {
  CHECK_THROWS_AS(TrialSet(Matrix::Constant(1, 3, std::nan(""))), std::invalid_argument);
  CHECK_THROWS_AS(ActivationSet(1, Matrix::Constant(1, 3, -1.0)), std::invalid_argument);
  HyperParams hp;
  hp.burn_in = hp.mcmc_iters;
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
  hp = HyperParams{};
  hp.alpha = 2.5;
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
}
