#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "acsc/error.hpp"
#include "acsc/optim.hpp"

namespace acsc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

using DenseMatrix = Eigen::MatrixXd;

// Compact limited-memory representation B = theta I - W M W^T with
// W = [Y, theta S] and M = [[-D, L^T], [L, theta S^T S]]^-1.
class Memory {
 public:
  Memory(Index n, int capacity)
      : capacity_(capacity),
        s_(n, capacity),
        y_(n, capacity),
        sy_(capacity, capacity),
        ss_(capacity, capacity) {
    clear();
  }

  int size() const { return count_; }
  double theta() const { return theta_; }
  const DenseMatrix& w() const { return w_; }
  const DenseMatrix& m() const { return m_; }

  void clear() {
    count_ = 0;
    theta_ = 1.0;
    w_.resize(s_.rows(), 0);
    m_.resize(0, 0);
  }

  void push(const Vector& s, const Vector& y) {
    if (count_ == capacity_) {
      const int c = capacity_ - 1;
      s_.leftCols(c) = s_.rightCols(c).eval();
      y_.leftCols(c) = y_.rightCols(c).eval();
      sy_.topLeftCorner(c, c) = sy_.bottomRightCorner(c, c).eval();
      ss_.topLeftCorner(c, c) = ss_.bottomRightCorner(c, c).eval();
      count_ = c;
    }
    const int k = count_;
    s_.col(k) = s;
    y_.col(k) = y;
    for (int i = 0; i <= k; ++i) {
      sy_(k, i) = s.dot(y_.col(i));
      sy_(i, k) = s_.col(i).dot(y);
      ss_(k, i) = ss_(i, k) = s.dot(s_.col(i));
    }
    count_ = k + 1;
    theta_ = y.squaredNorm() / s.dot(y);
    if (!rebuild()) clear();
  }

 private:
  bool rebuild() {
    const int k = count_;
    w_.resize(s_.rows(), 2 * k);
    w_.leftCols(k) = y_.leftCols(k);
    w_.rightCols(k) = theta_ * s_.leftCols(k);
    DenseMatrix middle = DenseMatrix::Zero(2 * k, 2 * k);
    for (int i = 0; i < k; ++i) {
      middle(i, i) = -sy_(i, i);
      for (int j = 0; j < i; ++j) {
        middle(k + i, j) = sy_(i, j);  // L
        middle(j, k + i) = sy_(i, j);  // L^T
      }
    }
    middle.bottomRightCorner(k, k) = theta_ * ss_.topLeftCorner(k, k);
    Eigen::FullPivLU<DenseMatrix> lu(middle);
    if (!lu.isInvertible()) return false;
    m_ = lu.inverse();
    return m_.allFinite();
  }

  int capacity_;
  int count_ = 0;
  double theta_ = 1.0;
  DenseMatrix s_, y_, sy_, ss_, w_, m_;
};

struct CauchyPoint {
  Vector x;
  Eigen::VectorXd c;  // W^T (x_cp - x)
};

CauchyPoint generalized_cauchy_point(const BoxProblem& prob, const Vector& x, const Vector& g,
                                     const Memory& mem) {
  const Index n = x.size();
  const double theta = mem.theta();
  const DenseMatrix& W = mem.w();
  const DenseMatrix& M = mem.m();
  const Index k2 = W.cols();

  CauchyPoint cp{x, Eigen::VectorXd::Zero(k2)};
  Vector d(n);
  std::vector<std::pair<double, Index>> breaks;
  for (Index i = 0; i < n; ++i) {
    double t = kInf;
    if (g[i] < 0.0 && std::isfinite(prob.upper[i])) {
      t = (x[i] - prob.upper[i]) / g[i];
    } else if (g[i] > 0.0 && std::isfinite(prob.lower[i])) {
      t = (x[i] - prob.lower[i]) / g[i];
    }
    if (g[i] == 0.0) t = kInf;
    if (t <= 0.0) {
      d[i] = 0.0;
    } else {
      d[i] = -g[i];
      if (t < kInf) breaks.emplace_back(t, i);
    }
  }

  Eigen::VectorXd p = W.transpose() * d;
  double fp = -d.squaredNorm();
  double fpp = -theta * fp - (k2 > 0 ? p.dot(M * p) : 0.0);
  const double fpp_floor = kEps * std::max(fpp, kEps);
  fpp = std::max(fpp, fpp_floor);
  double dt_min = -fp / fpp;
  double t_old = 0.0;

  auto later = [](const auto& a, const auto& b) { return a.first > b.first; };
  std::make_heap(breaks.begin(), breaks.end(), later);
  while (!breaks.empty()) {
    std::pop_heap(breaks.begin(), breaks.end(), later);
    const auto [t, b] = breaks.back();
    breaks.pop_back();
    const double dt = t - t_old;
    if (dt_min < dt) break;

    const double xb = d[b] > 0.0 ? prob.upper[b] : prob.lower[b];
    const double zb = xb - x[b];
    cp.x[b] = xb;
    cp.c += dt * p;
    const double gb = g[b];
    if (k2 > 0) {
      const Eigen::VectorXd wb = W.row(b).transpose();
      const Eigen::VectorXd mwb = M * wb;
      fp += dt * fpp + gb * gb + theta * gb * zb - gb * mwb.dot(cp.c);
      fpp += -theta * gb * gb - 2.0 * gb * mwb.dot(p) - gb * gb * mwb.dot(wb);
      p += gb * wb;
    } else {
      fp += dt * fpp + gb * gb + theta * gb * zb;
      fpp += -theta * gb * gb;
    }
    fpp = std::max(fpp, fpp_floor);
    d[b] = 0.0;
    dt_min = -fp / fpp;
    t_old = t;
  }
  dt_min = std::max(dt_min, 0.0);
  t_old += dt_min;
  for (Index i = 0; i < n; ++i) {
    if (d[i] != 0.0) cp.x[i] = x[i] + t_old * d[i];
  }
  cp.x = prob.clamp(cp.x);
  if (k2 > 0) cp.c += dt_min * p;
  return cp;
}

// Minimizes the quadratic model over the variables left free at the Cauchy
// point, then returns a feasible target point.
Vector subspace_minimization(const BoxProblem& prob, const Vector& x, const Vector& g,
                             const CauchyPoint& cp, const Memory& mem) {
  const double theta = mem.theta();
  std::vector<Index> free;
  for (Index i = 0; i < x.size(); ++i) {
    if (cp.x[i] > prob.lower[i] && cp.x[i] < prob.upper[i]) free.push_back(i);
  }
  if (free.empty()) return cp.x;
  const Index nf = static_cast<Index>(free.size());
  const DenseMatrix& W = mem.w();
  const DenseMatrix& M = mem.m();
  const Index k2 = W.cols();

  Eigen::VectorXd mc;
  if (k2 > 0) mc = M * cp.c;
  Eigen::VectorXd reduced(nf);
  DenseMatrix wf(nf, k2);
  for (Index j = 0; j < nf; ++j) {
    const Index i = free[static_cast<std::size_t>(j)];
    double r = g[i] + theta * (cp.x[i] - x[i]);
    if (k2 > 0) {
      wf.row(j) = W.row(i);
      r -= W.row(i).dot(mc);
    }
    reduced[j] = r;
  }
  Eigen::VectorXd du = -reduced / theta;
  if (k2 > 0) {
    Eigen::VectorXd v = M * (wf.transpose() * reduced);
    DenseMatrix nmat = DenseMatrix::Identity(k2, k2) - (M * (wf.transpose() * wf)) / theta;
    Eigen::PartialPivLU<DenseMatrix> lu(nmat);
    v = lu.solve(v);
    if (v.allFinite()) du -= (wf * v) / (theta * theta);
  }

  // Projection first; truncation when the projected point is not a descent
  // target.
  Vector projected = cp.x;
  for (Index j = 0; j < nf; ++j) {
    const Index i = free[static_cast<std::size_t>(j)];
    projected[i] = std::clamp(cp.x[i] + du[j], prob.lower[i], prob.upper[i]);
  }
  if ((projected - x).dot(g) < 0.0) return projected;

  double step = 1.0;
  for (Index j = 0; j < nf; ++j) {
    const Index i = free[static_cast<std::size_t>(j)];
    if (du[j] > 0.0) {
      step = std::min(step, (prob.upper[i] - cp.x[i]) / du[j]);
    } else if (du[j] < 0.0) {
      step = std::min(step, (prob.lower[i] - cp.x[i]) / du[j]);
    }
  }
  Vector truncated = cp.x;
  for (Index j = 0; j < nf; ++j) {
    const Index i = free[static_cast<std::size_t>(j)];
    truncated[i] = cp.x[i] + step * du[j];
  }
  return prob.clamp(truncated);
}

struct LinePoint {
  double alpha = 0.0;
  double f = 0.0;
  double df = 0.0;
  Vector x;
  Vector g;
};

double cubic_minimizer(double a, double fa, double dfa, double b, double fb, double dfb) {
  const double d1 = dfa + dfb - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - dfa * dfb;
  if (disc < 0.0) return 0.5 * (a + b);
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double denom = dfb - dfa + 2.0 * d2;
  if (denom == 0.0) return 0.5 * (a + b);
  return b - (b - a) * (dfb + d2 - d1) / denom;
}

// Strong Wolfe search on (0, alpha_max]. Returns false when no point with
// sufficient decrease was found.
bool line_search(const BoxProblem& prob, const Vector& x, double f0, const Vector& g0,
                 const Vector& dir, double alpha_init, double alpha_max, int max_evals,
                 int& evaluations, LinePoint& out) {
  constexpr double c1 = 1e-4;
  constexpr double c2 = 0.9;
  const double df0 = g0.dot(dir);

  auto eval = [&](double alpha) {
    LinePoint pt;
    pt.alpha = alpha;
    pt.x = prob.clamp(x + alpha * dir);
    pt.g.resize(x.size());
    pt.f = prob.evaluate(pt.x, pt.g);
    ++evaluations;
    pt.df = pt.g.dot(dir);
    if (!std::isfinite(pt.f) || !pt.g.allFinite()) pt.f = kInf;
    return pt;
  };
  auto armijo = [&](const LinePoint& pt) { return pt.f <= f0 + c1 * pt.alpha * df0; };
  auto curvature = [&](const LinePoint& pt) { return std::abs(pt.df) <= -c2 * df0; };

  LinePoint lo{0.0, f0, df0, x, g0};
  LinePoint hi;
  bool have_hi = false;
  double alpha = std::min(alpha_init, alpha_max);
  int used = 0;

  while (used < max_evals) {
    LinePoint pt = eval(alpha);
    ++used;
    if (!armijo(pt) || (lo.alpha > 0.0 && pt.f >= lo.f)) {
      hi = std::move(pt);
      have_hi = true;
      break;
    }
    if (curvature(pt)) {
      out = std::move(pt);
      return true;
    }
    if (pt.df >= 0.0) {
      hi = std::move(lo);
      lo = std::move(pt);
      have_hi = true;
      break;
    }
    if (alpha >= alpha_max) {
      out = std::move(pt);
      return true;
    }
    lo = std::move(pt);
    alpha = std::min(2.0 * alpha, alpha_max);
  }

  while (have_hi && used < max_evals) {
    const double a = lo.alpha;
    const double b = hi.alpha;
    double trial = std::isfinite(hi.f) ? cubic_minimizer(a, lo.f, lo.df, b, hi.f, hi.df)
                                       : 0.5 * (a + b);
    const double low = std::min(a, b);
    const double high = std::max(a, b);
    const double margin = 0.1 * (high - low);
    if (!(trial > low + margin && trial < high - margin)) trial = 0.5 * (a + b);
    if (high - low <= kEps * std::max(1.0, high)) break;
    LinePoint pt = eval(trial);
    ++used;
    if (!armijo(pt) || pt.f >= lo.f) {
      hi = std::move(pt);
    } else {
      if (curvature(pt)) {
        out = std::move(pt);
        return true;
      }
      if (pt.df * (hi.alpha - lo.alpha) >= 0.0) hi = std::move(lo);
      lo = std::move(pt);
    }
  }
  if (lo.alpha > 0.0 && lo.f < f0) {
    out = std::move(lo);
    return true;
  }
  return false;
}

}  // namespace

double BoxProblem::evaluate(const Vector& x, Vector& grad) const {
  if (value_and_gradient) return value_and_gradient(x, grad);
  grad.resize(x.size());
  gradient(x, grad);
  return objective(x);
}

double BoxProblem::value(const Vector& x) const {
  if (objective) return objective(x);
  Vector scratch(x.size());
  return value_and_gradient(x, scratch);
}

Vector BoxProblem::clamp(const Vector& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

double BoxProblem::projected_gradient_norm(const Vector& x, const Vector& grad) const {
  return (clamp(x - grad) - x).lpNorm<Eigen::Infinity>();
}

void BoxProblem::validate() const {
  require(lower.size() == upper.size(), "BoxProblem: bound sizes differ");
  require((lower.array() <= upper.array()).all(), "BoxProblem: lower bound exceeds upper bound");
  require(static_cast<bool>(value_and_gradient) ||
              (static_cast<bool>(objective) && static_cast<bool>(gradient)),
          "BoxProblem: missing oracle");
}

std::string_view to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::max_iters: return "max-iters";
    case SolverStatus::line_search_failure: return "line-search-failure";
    case SolverStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

BoxResult minimize_box(const BoxProblem& prob, const Vector& x0, const LbfgsbOptions& options) {
  prob.validate();
  require(x0.size() == prob.dimension(), "minimize_box: x0 has wrong dimension");
  require(options.memory >= 1 && options.tol > 0.0, "minimize_box: invalid options");

  const auto start = std::chrono::steady_clock::now();
  BoxResult result;
  SolverReport& rep = result.report;
  Vector x = prob.clamp(x0);
  Vector g(x.size());
  double f = prob.evaluate(x, g);
  rep.evaluations = 1;
  if (!std::isfinite(f) || !g.allFinite()) {
    rep.status = SolverStatus::numerical_failure;
    rep.objective = f;
    result.x = std::move(x);
    return result;
  }
  if (options.record_trace) rep.record(f, start);

  Memory mem(x.size(), options.memory);
  rep.status = SolverStatus::max_iters;
  int iter = 0;
  while (true) {
    rep.projected_grad_norm = prob.projected_gradient_norm(x, g);
    if (rep.projected_grad_norm <= options.tol) {
      rep.status = SolverStatus::converged;
      break;
    }
    if (iter >= options.max_iter) break;

    const CauchyPoint cp = generalized_cauchy_point(prob, x, g, mem);
    Vector target = subspace_minimization(prob, x, g, cp, mem);
    Vector dir = target - x;
    if (!(dir.dot(g) < 0.0)) {
      dir = cp.x - x;
      if (!(dir.dot(g) < 0.0)) {
        if (mem.size() > 0) {
          mem.clear();
          continue;
        }
        rep.status = SolverStatus::line_search_failure;
        break;
      }
    }
    const double alpha_init = mem.size() == 0 ? std::min(1.0, 1.0 / dir.norm()) : 1.0;
    LinePoint next;
    if (!line_search(prob, x, f, g, dir, alpha_init, 1.0, options.max_line_search,
                     rep.evaluations, next)) {
      if (mem.size() > 0) {
        mem.clear();
        continue;
      }
      rep.status = SolverStatus::line_search_failure;
      break;
    }
    const Vector s = next.x - x;
    const Vector y = next.g - g;
    const double f_prev = f;
    x = std::move(next.x);
    g = std::move(next.g);
    f = next.f;
    ++iter;
    if (options.record_trace) rep.record(f, start);
    if (options.ftol > 0.0 &&
        f_prev - f <= options.ftol * std::max({std::abs(f_prev), std::abs(f), 1.0})) {
      rep.projected_grad_norm = prob.projected_gradient_norm(x, g);
      rep.status = SolverStatus::converged;
      break;
    }
    const double sy = s.dot(y);
    if (sy > kEps * y.squaredNorm()) mem.push(s, y);
  }
  rep.iterations = iter;
  rep.objective = f;
  result.x = std::move(x);
  return result;
}

}  // namespace acsc
