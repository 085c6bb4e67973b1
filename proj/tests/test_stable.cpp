#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "acsc/stable.hpp"
#include "oracles.hpp"

using namespace acsc;

namespace {

std::complex<double> empirical_cf(const std::vector<double>& xs, double omega) {
  std::complex<double> acc = 0.0;
  for (double x : xs) acc += std::exp(std::complex<double>(0.0, omega * x));
  return acc / static_cast<double>(xs.size());
}

std::vector<double> draws(const StableParams& p, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& v : out) v = sample_stable(p, rng);
  return out;
}

}  // namespace

TEST_CASE("alpha = 2 draws are Gaussian with variance 2 sigma^2") {
  const auto xs = draws({2.0, 0.0, 1.0 / std::sqrt(2.0), 0.0}, 100000, 11);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() - 1);
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("location shifts every draw exactly") {
  for (double alpha : {0.7, 1.0, 1.5, 2.0}) {
    Rng a(3), b(3);
    for (int i = 0; i < 1000; ++i) {
      const double shifted = sample_stable({alpha, 0.4, 1.3, 5.0}, a);
      const double plain = sample_stable({alpha, 0.4, 1.3, 0.0}, b);
      CHECK(shifted - plain == doctest::Approx(5.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("empirical characteristic function at alpha = 1.5") {
  const StableParams p{1.5, 0.0, 1.0, 0.0};
  const auto xs = draws(p, 100000, 21);
  for (double w : {0.5, 1.0, 2.0}) {
    CHECK(std::abs(empirical_cf(xs, w) - characteristic_function(p, w)) < 0.01);
  }
}

TEST_CASE("empirical characteristic function over skewed and symmetric laws") {
  const std::vector<std::pair<double, double>> cases{{2, 0}, {1.5, 0}, {1.2, 0}, {1, 1}, {0.5, 1}};
  std::uint64_t seed = 100;
  for (const auto& [alpha, beta] : cases) {
    const StableParams p{alpha, beta, 1.0, 0.0};
    const auto xs = draws(p, 100000, seed++);
    for (double w : {-1.5, -0.5, 0.3, 1.0, 2.0}) {
      INFO("alpha=" << alpha << " beta=" << beta << " omega=" << w);
      CHECK(std::abs(empirical_cf(xs, w) - characteristic_function(p, w)) < 0.02);
    }
  }
}

TEST_CASE("characteristic function closed forms") {
  CHECK(characteristic_function({1.3, 0.5, 2.0, 1.0}, 0.0) == std::complex<double>(1.0, 0.0));
  const auto g = characteristic_function({2.0, 0.0, 1.0, 0.0}, 1.0);
  CHECK(g.real() == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(std::abs(g.imag()) < 1e-15);
  // alpha = 1, beta = 0.5, omega = 2, with the 2/pi factor of the log term.
  const auto c = characteristic_function({1.0, 0.5, 1.0, 0.0}, 2.0);
  const std::complex<double> expected =
      std::exp(std::complex<double>(-2.0, -2.0 * 0.5 * (2.0 / std::numbers::pi) * std::log(2.0)));
  CHECK(std::abs(c - expected) < 1e-14);
}

TEST_CASE("characteristic function agrees with a second implementation") {
  // exp(-|s w|^a (1 - i b sign(w) tan(pi a / 2)) + i mu w), written separately.
  auto other = [](double a, double b, double s, double mu, double w) {
    using C = std::complex<double>;
    const double sg = (w > 0) - (w < 0);
    const C bracket = C(1.0, 0.0) - C(0.0, 1.0) * b * sg * std::tan(std::numbers::pi * a / 2);
    return std::exp(-std::pow(std::abs(s * w), a) * bracket + C(0.0, mu * w));
  };
  for (double a : {0.4, 0.9, 1.3, 1.9}) {
    for (double w : {-3.0, -0.2, 0.7, 2.5}) {
      const auto got = characteristic_function({a, -0.3, 0.8, 0.25}, w);
      CHECK(std::abs(got - other(a, -0.3, 0.8, 0.25, w)) < 1e-14);
    }
  }
}

TEST_CASE("invalid parameters are rejected") {
  Rng rng(1);
  CHECK_THROWS_AS(sample_stable({0.0, 0.0, 1.0, 0.0}, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_stable({2.1, 0.0, 1.0, 0.0}, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_stable({1.5, 1.5, 1.0, 0.0}, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_stable({1.5, 0.0, 0.0, 0.0}, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_positive_stable(2.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_positive_stable(0.0, rng), std::invalid_argument);
}

TEST_CASE("positive-stable prior draws are strictly positive") {
  for (double a : {0.5, 1.0, 1.2, 1.8}) {
    Rng rng(static_cast<std::uint64_t>(a * 10));
    bool all_positive = true;
    for (int i = 0; i < 1000000; ++i) {
      const double phi = sample_positive_stable(a, rng);
      all_positive = all_positive && phi > 0.0 && std::isfinite(phi);
    }
    CHECK(all_positive);
  }
}

TEST_CASE("prior at model alpha = 1 is the Levy law") {
  // S(1/2, 1, c, 0) is Levy(0, c); here c = 2 cos(pi/4)^2 = 1.
  CHECK(impulse_prior_scale(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  Rng rng(77);
  std::vector<double> xs(100000);
  for (auto& v : xs) v = sample_positive_stable(1.0, rng);
  const double ks = oracle::ks_statistic(xs, [](double x) { return oracle::levy_cdf(x, 1.0); });
  CHECK(ks < 0.01);
}

TEST_CASE("prior upper tail decays with exponent alpha / 2") {
  Rng rng(1234);
  std::vector<double> xs(1000000);
  for (auto& v : xs) v = sample_positive_stable(1.2, rng);
  std::sort(xs.begin(), xs.end());
  // Least-squares slope of log survival against log x over the top 1% to 0.01%.
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = xs.size() - 10000; i < xs.size() - 100; i += 10) {
    const double lx = std::log(xs[i]);
    const double ly = std::log((n - static_cast<double>(i)) / n);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    ++m;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  CHECK(std::abs(slope + 0.6) < 0.05);
}

TEST_CASE("same seed gives the same draws and derived streams differ") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(sample_stable({1.4, 0.2, 1.0, 0.0}, a) == sample_stable({1.4, 0.2, 1.0, 0.0}, b));
  Rng s1 = derive_stream(42, StreamTag::estep, 1, 0);
  Rng s2 = derive_stream(42, StreamTag::estep, 1, 0);
  Rng s3 = derive_stream(42, StreamTag::estep, 1, 1);
  const auto v1 = s1.next_u64(), v2 = s2.next_u64(), v3 = s3.next_u64();
  CHECK(v1 == v2);
  CHECK(v1 != v3);
}
