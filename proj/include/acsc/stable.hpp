#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace acsc {

/// Seedable generator with keyed sub-streams. Two Rng objects built from the
/// same seed and key produce identical draw sequences.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream identified by (seed, keys...). Used to give each
  /// (EM iteration, trial) its own stream so results do not depend on
  /// scheduling.
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  /// Uniform on [0, 1).
  double uniform();
  double exponential();
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  Rng() = default;

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// First key of every derived stream, so different consumers of one seed
/// never share draws.
enum class StreamTag : std::uint64_t {
  estep = 1,
  dictionary_init = 2,
  synthetic = 3,
  corruption = 4,
  benchmark = 5,
};

inline Rng derive_stream(std::uint64_t seed, StreamTag tag, std::uint64_t a = 0,
                         std::uint64_t b = 0) {
  return Rng::derive(seed, {static_cast<std::uint64_t>(tag), a, b});
}

/// Parameters of S(alpha, beta, sigma, mu).
///
/// The parametrization is the standard "1-parametrization"
/// (Samorodnitsky & Taqqu): for alpha != 1
///   E exp(i w X) = exp(-|sigma w|^alpha (1 - i beta sign(w) tan(pi alpha / 2)) + i mu w)
/// and for alpha == 1
///   E exp(i w X) = exp(-sigma |w| (1 + i beta (2/pi) sign(w) log|w|) + i mu w).
/// beta = 1 with alpha < 1 is supported on (mu, inf). S(2, 0, sigma, mu) = N(mu, 2 sigma^2).
struct StableParams {
  double alpha = 2.0;
  double beta = 0.0;
  double sigma = 1.0;
  double mu = 0.0;

  void validate() const;
};

/// One Chambers-Mallows-Stuck draw. Consumes exactly one uniform_open() and
/// one exponential() from rng.
double sample_stable(const StableParams& p, Rng& rng);

/// Scale of the impulse prior: 2 (cos(pi alpha / 4))^(2 / alpha).
double impulse_prior_scale(double alpha_model);

/// Draw phi ~ S(alpha/2, 1, 2 (cos(pi alpha/4))^(2/alpha), 0), strictly positive.
/// Requires 0 < alpha_model < 2.
double sample_positive_stable(double alpha_model, Rng& rng);

std::complex<double> characteristic_function(const StableParams& p, double omega);

}  // namespace acsc
