#include "acsc/stable.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "acsc/error.hpp"

namespace acsc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAlphaOneBand = 1e-8;

}  // namespace

Rng::Rng(std::uint64_t seed) : Rng(derive(seed, {})) {}

Rng Rng::derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * keys.size());
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto k : keys) push(k);
  std::seed_seq seq(words.begin(), words.end());
  Rng rng;
  rng.engine_.seed(seq);
  return rng;
}

double Rng::uniform_open() {
  // 53 random bits mapped to the centres of 2^53 equal cells of (0, 1).
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::exponential() { return -std::log(uniform_open()); }

double Rng::normal() { return normal_(engine_); }

std::uint64_t Rng::below(std::uint64_t n) {
  require(n > 0, "Rng::below: empty range");
  std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(engine_);
}

void StableParams::validate() const {
  require(alpha > 0.0 && alpha <= 2.0, "stable: alpha must lie in (0, 2]");
  require(beta >= -1.0 && beta <= 1.0, "stable: beta must lie in [-1, 1]");
  require(sigma > 0.0 && std::isfinite(sigma), "stable: sigma must be positive");
  require(std::isfinite(mu), "stable: mu must be finite");
}

double sample_stable(const StableParams& p, Rng& rng) {
  p.validate();
  const double v = kPi * (rng.uniform_open() - 0.5);
  const double w = rng.exponential();
  const double a = p.alpha;
  const double b = p.beta;

  if (std::abs(a - 1.0) < kAlphaOneBand) {
    const double half_pi = 0.5 * kPi;
    const double shifted = half_pi + b * v;
    const double x =
        (2.0 / kPi) * (shifted * std::tan(v) - b * std::log(half_pi * w * std::cos(v) / shifted));
    return p.sigma * x + (2.0 / kPi) * b * p.sigma * std::log(p.sigma) + p.mu;
  }

  const double zeta = b * std::tan(0.5 * kPi * a);
  const double shift = std::atan(zeta) / a;
  const double scale = std::pow(1.0 + zeta * zeta, 0.5 / a);
  const double x = scale * std::sin(a * (v + shift)) / std::pow(std::cos(v), 1.0 / a) *
                   std::pow(std::cos(v - a * (v + shift)) / w, (1.0 - a) / a);
  return p.sigma * x + p.mu;
}

double impulse_prior_scale(double alpha_model) {
  return 2.0 * std::pow(std::cos(0.25 * kPi * alpha_model), 2.0 / alpha_model);
}

double sample_positive_stable(double alpha_model, Rng& rng) {
  require(alpha_model > 0.0 && alpha_model < 2.0,
          "sample_positive_stable: alpha_model must lie in (0, 2)");
  const double a = 0.5 * alpha_model;
  const double sigma = impulse_prior_scale(alpha_model);
  // Totally skewed CMS with beta = 1: atan(tan(pi a / 2)) / a = pi / 2 and
  // (1 + tan^2)^(1 / 2a) = cos(pi a / 2)^(-1 / a).
  const double scale = std::pow(std::cos(0.5 * kPi * a), -1.0 / a);
  for (;;) {
    const double v = kPi * (rng.uniform_open() - 0.5);
    const double w = rng.exponential();
    const double arg = v + 0.5 * kPi;
    const double x = scale * std::sin(a * arg) / std::pow(std::cos(v), 1.0 / a) *
                     std::pow(std::cos(v - a * arg) / w, (1.0 - a) / a);
    const double phi = sigma * x;
    // Underflow to zero or overflow only happens at the extreme edges of
    // (v, w); redraw so the support stays (0, inf).
    if (phi > 0.0 && std::isfinite(phi)) return phi;
  }
}

std::complex<double> characteristic_function(const StableParams& p, double omega) {
  p.validate();
  if (omega == 0.0) return {1.0, 0.0};
  const double sgn = omega > 0.0 ? 1.0 : -1.0;
  const double abs_w = std::abs(omega);
  std::complex<double> exponent;
  if (std::abs(p.alpha - 1.0) < kAlphaOneBand) {
    const double mag = p.sigma * abs_w;
    exponent = {-mag, -mag * p.beta * (2.0 / kPi) * sgn * std::log(abs_w)};
  } else {
    const double mag = std::pow(p.sigma * abs_w, p.alpha);
    exponent = {-mag, mag * p.beta * sgn * std::tan(0.5 * kPi * p.alpha)};
  }
  exponent += std::complex<double>(0.0, p.mu * omega);
  return std::exp(exponent);
}

}  // namespace acsc
