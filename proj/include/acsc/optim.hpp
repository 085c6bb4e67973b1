#pragma once

#include <chrono>
#include <functional>
#include <string_view>
#include <vector>

#include "acsc/core.hpp"

namespace acsc {

/// Smooth objective over a box l <= x <= u. Bounds may be infinite.
struct BoxProblem {
  std::function<double(const Vector&)> objective;
  std::function<void(const Vector&, Vector&)> gradient;
  /// Optional fused oracle; when set it is preferred over the two above.
  std::function<double(const Vector&, Vector&)> value_and_gradient;
  Vector lower;
  Vector upper;

  Index dimension() const { return lower.size(); }
  double evaluate(const Vector& x, Vector& grad) const;
  double value(const Vector& x) const;
  Vector clamp(const Vector& x) const;
  /// ||P(x - g) - x||_inf, zero exactly at KKT points of the box problem.
  double projected_gradient_norm(const Vector& x, const Vector& grad) const;
  void validate() const;
};

enum class SolverStatus { converged, max_iters, line_search_failure, numerical_failure };

std::string_view to_string(SolverStatus status);

struct SolverReport {
  int iterations = 0;
  int evaluations = 0;
  double projected_grad_norm = 0.0;
  double objective = 0.0;
  SolverStatus status = SolverStatus::max_iters;
  /// Objective at every accepted iterate, starting with the initial point.
  std::vector<double> objective_trace;
  /// Seconds since the solver started, one entry per objective_trace entry.
  std::vector<double> time_trace;

  void record(double objective, std::chrono::steady_clock::time_point start) {
    objective_trace.push_back(objective);
    time_trace.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
};

struct BoxResult {
  Vector x;
  SolverReport report;
};

struct LbfgsbOptions {
  int memory = 10;
  double tol = 1e-8;
  /// Also stop once an iteration lowers f by at most ftol * max(|f|, 1);
  /// 0 disables the test.
  double ftol = 0.0;
  int max_iter = 1000;
  int max_line_search = 30;
  bool record_trace = false;
};

/// Limited-memory BFGS with bound constraints: generalized Cauchy point along
/// the projected gradient path, direct primal subspace minimization over the
/// free variables, and a strong Wolfe line search capped at the feasible step.
/// x0 is clamped into the box first.
BoxResult minimize_box(const BoxProblem& problem, const Vector& x0,
                       const LbfgsbOptions& options = {});

/// Elementwise max(v - t, 0), the proximal map of t * sum(z) + indicator(z >= 0).
Vector prox_nonneg_l1(const Vector& v, double threshold);

enum class ProxVariant { ista, fista };

struct ProxOptions {
  ProxVariant variant = ProxVariant::fista;
  double tol = 1e-8;
  int max_iter = 10000;
  /// 0 means estimate by power iteration on gradient differences.
  double lipschitz = 0.0;
  int power_iters = 50;
  double safety = 1.05;
  /// Gradient-based momentum restart for FISTA.
  bool restart = true;
  bool record_trace = false;
};

/// Proximal gradient on smooth(x) + l1_weight * sum(x) over the box of
/// `smooth`, whose lower bounds must be >= 0 when l1_weight > 0. Stops when
/// the gradient mapping ||y - prox(y - s grad(y))||_inf / s <= tol.
BoxResult fista_box(const BoxProblem& smooth, double l1_weight, const Vector& x0,
                    const ProxOptions& options = {});

}  // namespace acsc
