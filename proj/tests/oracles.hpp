#pragma once

// Independent reference computations used only by tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "facekit/image.hpp"

namespace oracle {

/// O(N^4) 2-D DFT of a patch; returns the mean non-DC magnitude / 400.
inline double dft_statistic(const facekit::Patch& p) {
  constexpr int n = static_cast<int>(facekit::kPatchSide);
  double sum = 0.0;
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u == 0 && v == 0) continue;
      std::complex<double> acc = 0.0;
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
          const double angle = -2.0 * std::numbers::pi * (static_cast<double>(u * r) / n + static_cast<double>(v * c) / n);
          acc += p.at(r, c) * std::polar(1.0, angle);
        }
      }
      sum += std::abs(acc);
    }
  }
  return sum / 399.0 / 400.0;
}

/// Otsu by exhaustive scan: for each t, split pixels into {v < t} and
/// {v >= t} directly and compute w0 w1 (m0 - m1)^2.
inline int otsu_exhaustive(const facekit::GrayImage& img) {
  double best = -1.0;
  int best_t = 0;
  for (int t = 0; t < 256; ++t) {
    double n0 = 0, s0 = 0, n1 = 0, s1 = 0;
    for (double v : img.pixels()) {
      const double q = static_cast<double>(std::lround(v));
      if (q < t) { n0 += 1; s0 += q; } else { n1 += 1; s1 += q; }
    }
    double between = 0.0;
    if (n0 > 0 && n1 > 0) {
      const double n = n0 + n1;
      const double d = s0 / n0 - s1 / n1;
      between = (n0 / n) * (n1 / n) * d * d;
    }
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

/// Union-find labeling of a 4-connected mask. Returns label per pixel (-1 background).
inline std::vector<int> label_components(const std::vector<std::uint8_t>& mask, std::size_t w, std::size_t h) {
  std::vector<int> parent(mask.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t i = r * w + c;
      if (!mask[i]) continue;
      if (c + 1 < w && mask[i + 1]) parent[find(static_cast<int>(i))] = find(static_cast<int>(i + 1));
      if (r + 1 < h && mask[i + w]) parent[find(static_cast<int>(i))] = find(static_cast<int>(i + w));
    }
  }
  std::vector<int> label(mask.size(), -1);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) label[i] = find(static_cast<int>(i));
  }
  return label;
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix, eigenvalues descending.
inline void jacobi_eigen(Eigen::MatrixXd a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) > a(y, y); });
  values.resize(n);
  vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    values[k] = a(order[k], order[k]);
    vectors.col(k) = v.col(order[k]);
  }
}

/// Sines of the principal angles between the column spans of two
/// orthonormal bases (singular values of (I - U1 U1') U2).
inline double max_principal_angle(const Eigen::MatrixXd& u1, const Eigen::MatrixXd& u2) {
  const Eigen::MatrixXd residual = u2 - u1 * (u1.transpose() * u2);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
  const double s = svd.singularValues().size() ? svd.singularValues().maxCoeff() : 0.0;
  return std::asin(std::min(1.0, s));
}

inline Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

/// Soft-margin dual: maximize e'a - 1/2 a'Qa, Q = (y y') .* K, 0 <= a <= C, y'a = 0.
struct DualProblem {
  Eigen::MatrixXd K;
  Eigen::VectorXd y;
  double C = 1.0;

  Eigen::MatrixXd Q() const { return (y * y.transpose()).cwiseProduct(K); }
  double objective(const Eigen::VectorXd& a) const { return a.sum() - 0.5 * a.dot(Q() * a); }
};

/// Exact optimum by enumerating every (lower, upper, free) assignment of the
/// variables and solving the equality-constrained stationarity system on the
/// free block.
inline Eigen::VectorXd solve_dual_enumerate(const DualProblem& p) {
  const Eigen::Index n = p.y.size();
  const Eigen::MatrixXd Q = p.Q();
  double best = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_a = Eigen::VectorXd::Zero(n);
  std::size_t combos = 1;
  for (Eigen::Index i = 0; i < n; ++i) combos *= 3;
  for (std::size_t code = 0; code < combos; ++code) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Index> free;
    std::size_t rest = code;
    for (Eigen::Index i = 0; i < n; ++i, rest /= 3) {
      const auto s = rest % 3;
      if (s == 1) a[i] = p.C;
      else if (s == 2) free.push_back(i);
    }
    const auto f = static_cast<Eigen::Index>(free.size());
    if (f == 0) {
      if (std::abs(p.y.dot(a)) > 1e-12) continue;
    } else {
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(f + 1, f + 1);
      Eigen::VectorXd rhs(f + 1);
      const Eigen::VectorXd qa = Q * a;
      for (Eigen::Index r = 0; r < f; ++r) {
        for (Eigen::Index c = 0; c < f; ++c) kkt(r, c) = Q(free[r], free[c]);
        kkt(r, f) = p.y[free[r]];
        kkt(f, r) = p.y[free[r]];
        rhs[r] = 1.0 - qa[free[r]];
      }
      double fixed_sum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) fixed_sum += p.y[i] * a[i];
      rhs[f] = -fixed_sum;
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
      const Eigen::VectorXd sol = cod.solve(rhs);
      if ((kkt * sol - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) continue;
      bool feasible = true;
      for (Eigen::Index r = 0; r < f; ++r) {
        if (sol[r] < -1e-10 || sol[r] > p.C + 1e-10) feasible = false;
        a[free[r]] = std::clamp(sol[r], 0.0, p.C);
      }
      if (!feasible) continue;
    }
    const double obj = p.objective(a);
    if (obj > best) {
      best = obj;
      best_a = a;
    }
  }
  return best_a;
}

/// Euclidean projection onto {0 <= a <= C, y'a = 0} by bisection on the multiplier.
inline Eigen::VectorXd project_feasible(const Eigen::VectorXd& z, const Eigen::VectorXd& y, double C) {
  auto at = [&](double lambda) { return (z - lambda * y).cwiseMax(0.0).cwiseMin(C).eval(); };
  double lo = -1e6, hi = 1e6;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (y.dot(at(mid)) > 0) lo = mid; else hi = mid;
  }
  return at(0.5 * (lo + hi));
}

/// Accelerated projected gradient ascent on the dual.
inline Eigen::VectorXd solve_dual_projected_gradient(const DualProblem& p, int iterations = 20000) {
  const Eigen::MatrixXd Q = p.Q();
  const double lipschitz = std::max(1e-12, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Q).eigenvalues().maxCoeff());
  const Eigen::Index n = p.y.size();
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n), prev = a, z = a;
  double t = 1.0;
  for (int k = 0; k < iterations; ++k) {
    const Eigen::VectorXd grad = Eigen::VectorXd::Ones(n) - Q * z;
    a = project_feasible(z + grad / lipschitz, p.y, p.C);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = a + ((t - 1.0) / t_next) * (a - prev);
    prev = a;
    t = t_next;
  }
  return a;
}

/// Bias by the usual rule: mean over free variables, else midpoint of the bound interval.
inline double dual_bias(const DualProblem& p, const Eigen::VectorXd& a, double free_eps = 1e-9) {
  const Eigen::VectorXd grad = p.Q() * a - Eigen::VectorXd::Ones(a.size());
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum = 0;
  int nfree = 0;
  for (Eigen::Index t = 0; t < a.size(); ++t) {
    const double yg = p.y[t] * grad[t];
    if (a[t] >= p.C - free_eps) {
      if (p.y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (a[t] <= free_eps) {
      if (p.y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      sum += yg;
      ++nfree;
    }
  }
  return -(nfree ? sum / nfree : (ub + lb) / 2);
}

}  // namespace oracle
