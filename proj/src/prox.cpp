#include <cmath>

#include "acsc/error.hpp"
#include "acsc/optim.hpp"
#include "acsc/stable.hpp"

namespace acsc {

Vector prox_nonneg_l1(const Vector& v, double threshold) {
  require(threshold >= 0.0, "prox_nonneg_l1: threshold must be nonnegative");
  return (v.array() - threshold).max(0.0).matrix();
}

namespace {

// Largest eigenvalue of the Hessian at x0 by power iteration on gradient
// differences (exact for quadratics).
double estimate_lipschitz(const BoxProblem& prob, const Vector& x0, int iters, int& evaluations) {
  const Index n = x0.size();
  Rng rng = Rng::derive(0x11b5, {static_cast<std::uint64_t>(n)});
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  v.normalize();
  Vector g0(n), g1(n);
  prob.evaluate(x0, g0);
  ++evaluations;
  double estimate = 0.0;
  for (int it = 0; it < iters; ++it) {
    prob.evaluate(x0 + v, g1);
    ++evaluations;
    Vector hv = g1 - g0;
    const double norm = hv.norm();
    if (!std::isfinite(norm)) throw NumericalError("fista_box: non-finite Hessian estimate");
    if (norm == 0.0) break;
    const double previous = estimate;
    estimate = norm;
    v = hv / norm;
    if (std::abs(estimate - previous) <= 1e-6 * estimate) break;
  }
  return estimate;
}

}  // namespace

BoxResult fista_box(const BoxProblem& smooth, double l1_weight, const Vector& x0,
                    const ProxOptions& options) {
  smooth.validate();
  require(x0.size() == smooth.dimension(), "fista_box: x0 has wrong dimension");
  require(l1_weight >= 0.0, "fista_box: l1 weight must be nonnegative");
  require(l1_weight == 0.0 || (smooth.lower.array() >= 0.0).all(),
          "fista_box: an l1 term needs nonnegative lower bounds");

  const auto start = std::chrono::steady_clock::now();
  BoxResult result;
  SolverReport& rep = result.report;
  const Index n = x0.size();
  auto prox = [&](const Vector& v, double step) {
    return (v.array() - step * l1_weight).matrix().cwiseMax(smooth.lower).cwiseMin(smooth.upper);
  };
  auto composite = [&](double smooth_value, const Vector& x) {
    return smooth_value + l1_weight * x.sum();
  };

  Vector x = smooth.clamp(x0);
  double lipschitz = options.lipschitz;
  if (lipschitz <= 0.0) lipschitz = estimate_lipschitz(smooth, x, options.power_iters, rep.evaluations);
  double step = lipschitz > 0.0 ? 1.0 / (options.safety * lipschitz) : 1.0;

  Vector y = x;
  Vector grad(n);
  double momentum = 1.0;
  double fx = smooth.value(x);
  ++rep.evaluations;
  if (!std::isfinite(fx)) {
    rep.status = SolverStatus::numerical_failure;
    result.x = std::move(x);
    return result;
  }
  if (options.record_trace) rep.record(composite(fx, x), start);

  rep.status = SolverStatus::max_iters;
  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    const double fy = smooth.evaluate(y, grad);
    ++rep.evaluations;
    if (!std::isfinite(fy) || !grad.allFinite()) {
      rep.status = SolverStatus::numerical_failure;
      break;
    }
    Vector next;
    double fnext = 0.0;
    // Backtrack when the fixed step overshoots the local curvature.
    for (int bt = 0; bt < 60; ++bt) {
      next = prox(y - step * grad, step);
      fnext = smooth.value(next);
      ++rep.evaluations;
      const Vector diff = next - y;
      if (std::isfinite(fnext) &&
          fnext <= fy + grad.dot(diff) + 0.5 / step * diff.squaredNorm() +
                       1e-12 * std::abs(fy)) {
        break;
      }
      step *= 0.5;
    }
    const double mapping = (y - next).lpNorm<Eigen::Infinity>() / step;
    if (options.variant == ProxVariant::fista) {
      const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      if (options.restart && (y - next).dot(next - x) > 0.0) {
        momentum = 1.0;
        y = next;
      } else {
        y = next + ((momentum - 1.0) / next_momentum) * (next - x);
        momentum = next_momentum;
      }
    } else {
      y = next;
    }
    x = std::move(next);
    fx = fnext;
    if (options.record_trace) rep.record(composite(fx, x), start);
    if (mapping <= options.tol) {
      rep.status = SolverStatus::converged;
      ++iter;
      break;
    }
  }
  rep.iterations = iter;
  Vector gx(n);
  fx = smooth.evaluate(x, gx);
  ++rep.evaluations;
  Vector full_grad = gx.array() + l1_weight;
  rep.projected_grad_norm = smooth.projected_gradient_norm(x, full_grad);
  rep.objective = composite(fx, x);
  result.x = std::move(x);
  return result;
}

}  // namespace acsc
