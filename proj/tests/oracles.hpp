#pragma once

// Slow, obviously-correct reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "acsc/core.hpp"
#include "acsc/stable.hpp"

namespace oracle {

using acsc::Index;
using acsc::Matrix;
using acsc::Vector;

inline Matrix random_matrix(Index rows, Index cols, acsc::Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

// Nonnegative and sparse: each entry nonzero with probability `density`.
inline Matrix random_activations(Index rows, Index cols, double density, acsc::Rng& rng) {
  Matrix m = Matrix::Zero(rows, cols);
  for (Index i = 0; i < m.size(); ++i) {
    if (rng.uniform() < density) m.data()[i] = rng.uniform_open();
  }
  return m;
}

inline Matrix random_weights(Index rows, Index cols, acsc::Rng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = 0.1 + 2.0 * rng.uniform();
  return m;
}

// x_hat[t] = sum_k sum_u z_k[u] d_k[t - u], one term at a time.
inline Vector reconstruct(const Matrix& atoms, const std::vector<double>& z_n) {
  const Index K = atoms.rows();
  const Index L = atoms.cols();
  const Index P = static_cast<Index>(z_n.size()) / K;
  Vector out = Vector::Zero(P + L - 1);
  for (Index t = 0; t < P + L - 1; ++t) {
    for (Index k = 0; k < K; ++k) {
      for (Index u = 0; u < P; ++u) {
        const Index i = t - u;
        if (i >= 0 && i < L) out[t] += z_n[static_cast<std::size_t>(k * P + u)] * atoms(k, i);
      }
    }
  }
  return out;
}

inline std::vector<double> row(const Matrix& m, Index n) {
  return std::vector<double>(m.data() + n * m.cols(), m.data() + (n + 1) * m.cols());
}

inline double objective(const Matrix& x, const Matrix& atoms, const Matrix& z, const Matrix& w,
                        double lambda) {
  double total = 0.0;
  for (Index n = 0; n < x.rows(); ++n) {
    const Vector xh = reconstruct(atoms, row(z, n));
    for (Index t = 0; t < x.cols(); ++t) {
      const double r = x(n, t) - xh[t];
      total += w(n, t) * r * r;
    }
    for (Index j = 0; j < z.cols(); ++j) total += lambda * std::abs(z(n, j));
  }
  return total;
}

// Explicit T x KL delayed-signal matrix of one trial: column (k, j) holds
// z_k shifted down by j.
inline Eigen::MatrixXd delay_matrix(const std::vector<double>& z_n, Index K, Index L, Index T) {
  const Index P = T - L + 1;
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(T, K * L);
  for (Index k = 0; k < K; ++k) {
    for (Index j = 0; j < L; ++j) {
      for (Index t = 0; t < T; ++t) {
        const Index u = t - j;
        if (u >= 0 && u < P) Z(t, k * L + j) = z_n[static_cast<std::size_t>(k * P + u)];
      }
    }
  }
  return Z;
}

struct DenseSystem {
  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;
  double energy = 0.0;
};

inline DenseSystem dense_system(const Matrix& x, const Matrix& z, const Matrix& w, Index K,
                                Index L) {
  const Index T = x.cols();
  DenseSystem s{Eigen::MatrixXd::Zero(K * L, K * L), Eigen::VectorXd::Zero(K * L), 0.0};
  for (Index n = 0; n < x.rows(); ++n) {
    const Eigen::MatrixXd Z = delay_matrix(row(z, n), K, L, T);
    const Eigen::VectorXd wn = w.row(n).transpose();
    const Eigen::VectorXd xn = x.row(n).transpose();
    s.gram += Z.transpose() * wn.asDiagonal() * Z;
    s.rhs += Z.transpose() * wn.asDiagonal() * xn;
    s.energy += (wn.array() * xn.array().square()).sum();
  }
  return s;
}

inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

// Relative agreement measured against the larger of the two norms.
inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-300});
  return (a - b).norm() / scale;
}

// Levy(0, c) distribution function.
inline double levy_cdf(double x, double c) {
  if (x <= 0.0) return 0.0;
  return std::erfc(std::sqrt(c / (2.0 * x)));
}

inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

// Exhaustive alignment: every permutation, sign and shift in [-L/2, L/2],
// with the circularly shifted estimate compared against the truth.
inline double brute_force_distance(const Matrix& est, const Matrix& truth) {
  const Index K = truth.rows();
  const Index L = truth.cols();
  std::vector<Index> perm(static_cast<std::size_t>(K));
  for (Index k = 0; k < K; ++k) perm[static_cast<std::size_t>(k)] = k;
  auto pair_cost = [&](Index e, Index t) {
    double best = std::numeric_limits<double>::infinity();
    for (int sign : {1, -1}) {
      for (Index s = -L / 2; s <= L / 2; ++s) {
        double sq = 0.0;
        for (Index i = 0; i < L; ++i) {
          const Index src = ((i - s) % L + L) % L;
          const double diff = sign * est(e, src) - truth(t, i);
          sq += diff * diff;
        }
        best = std::min(best, std::sqrt(sq));
      }
    }
    return best;
  };
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (Index k = 0; k < K; ++k) total += pair_cost(perm[static_cast<std::size_t>(k)], k);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(K);
}

}  // namespace oracle
