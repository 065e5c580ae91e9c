#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "facekit/error.hpp"

namespace facekit::svm {

enum class KernelKind { Linear, Polynomial, Rbf };

struct KernelSpec {
  KernelKind kind = KernelKind::Linear;
  int degree = 2;
  double offset = 1.0;
  double gamma = 1.0;

  static KernelSpec linear() { return {}; }
  static KernelSpec polynomial(int degree, double offset) {
    if (degree < 1) throw InvalidArgument("polynomial degree must be >= 1");
    return {KernelKind::Polynomial, degree, offset, 1.0};
  }
  /// (x.y + 1)^2
  static KernelSpec quadratic() { return polynomial(2, 1.0); }
  static KernelSpec rbf(double gamma) {
    if (!(gamma > 0.0)) throw InvalidArgument("rbf gamma must be > 0");
    return {KernelKind::Rbf, 2, 1.0, gamma};
  }

  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    if (x.size() != y.size()) {
      throw InvalidArgument("kernel arguments differ in dimension (" + std::to_string(x.size()) +
                            " vs " + std::to_string(y.size()) + ")");
    }
    switch (kind) {
      case KernelKind::Linear: return x.dot(y);
      case KernelKind::Polynomial: return std::pow(x.dot(y) + offset, degree);
      case KernelKind::Rbf: return std::exp(-gamma * (x - y).squaredNorm());
    }
    return 0.0;
  }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

inline double kernel_eval(const KernelSpec& k, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return k(x, y);
}

inline Eigen::MatrixXd gram_matrix(const KernelSpec& k, std::span<const Eigen::VectorXd> xs) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd g(n, n);
  if (k.kind != KernelKind::Rbf) {
    Eigen::MatrixXd x(xs.empty() ? 0 : xs.front().size(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (xs[i].size() != x.rows()) throw InvalidArgument("training vectors differ in dimension");
      x.col(i) = xs[i];
    }
    g = x.transpose() * x;
    if (k.kind == KernelKind::Polynomial) {
      g = g.unaryExpr([&](double v) { return std::pow(v + k.offset, k.degree); });
    }
    return g;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) g(i, j) = g(j, i) = k(xs[i], xs[j]);
  }
  return g;
}

/// Binary soft-margin model. f(x) = sum_i coef_i k(sv_i, x) + bias, with
/// coef_i = alpha_i y_i and 0 < |coef_i| <= C.
///
/// `pending` holds examples the online learner has accepted but not yet
/// given any weight (for instance while only one class has been seen).
/// They do not contribute to f.
struct SvmModel {
  KernelSpec kernel;
  double C = 1.0;
  std::vector<Eigen::VectorXd> support_vectors;
  std::vector<double> dual_coefs;
  double bias = 0.0;
  std::vector<Eigen::VectorXd> pending;
  std::vector<int> pending_labels;

  static SvmModel empty(const KernelSpec& kernel, double C) {
    SvmModel m;
    m.kernel = kernel;
    m.C = C;
    return m;
  }
};

struct SolverInfo {
  std::size_t iterations = 0;
  bool converged = false;
  double max_violation = 0.0;
};

struct TrainResult {
  SvmModel model;
  SolverInfo info;
};

inline constexpr std::size_t kDefaultMaxIterations = 100000;
inline constexpr double kDefaultTolerance = 1e-3;

namespace detail {

inline constexpr double kTau = 1e-12;

inline void check_finite(const Eigen::VectorXd& x) {
  if (!x.allFinite()) throw InvalidArgument("non-finite feature value");
}

inline void check_labels(std::span<const int> y) {
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw InvalidArgument("binary labels must be +1 or -1");
  }
  if (!pos || !neg) throw InvalidArgument("binary SVM training needs both classes");
}

}  // namespace detail

/// Dual solution over a precomputed kernel matrix.
struct DualSolution {
  Eigen::VectorXd alpha;
  double bias = 0.0;
  SolverInfo info;
};

/// SMO on the soft-margin dual
///   min 1/2 a'Qa - e'a,  Q_ij = y_i y_j K_ij,  0 <= a_i <= C,  y'a = 0.
/// Working pair: i is the maximal violator, j maximizes the second-order
/// objective decrease. Stops when m(a) - M(a) < tol.
inline DualSolution smo_solve(const Eigen::MatrixXd& K, std::span<const int> labels, double C, double tol,
                              std::size_t max_iter = kDefaultMaxIterations) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (K.rows() != n || K.cols() != n) throw InvalidArgument("kernel matrix size mismatch");
  if (!(C > 0.0)) throw InvalidArgument("C must be > 0");
  if (!(tol > 0.0)) throw InvalidArgument("tol must be > 0");
  detail::check_labels(labels);

  Eigen::VectorXd y(n);
  for (Eigen::Index t = 0; t < n; ++t) y[t] = labels[t];
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);  // Q a - e

  auto in_up = [&](Eigen::Index t) { return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0); };
  auto in_low = [&](Eigen::Index t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C); };

  DualSolution sol;
  std::size_t iter = 0;
  for (;; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (in_up(t) && -y[t] * grad[t] >= gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double best_gain = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      gmax2 = std::max(gmax2, y[t] * grad[t]);
      if (i < 0) continue;
      const double b = gmax + y[t] * grad[t];
      if (b > 0) {
        double a = K(i, i) + K(t, t) - 2.0 * K(i, t);
        if (a <= 0) a = detail::kTau;
        if (-(b * b) / a <= best_gain) {
          best_gain = -(b * b) / a;
          j = t;
        }
      }
    }
    sol.info.max_violation = (i < 0 || !std::isfinite(gmax2)) ? 0.0 : gmax + gmax2;
    if (j < 0 || sol.info.max_violation < tol) {
      sol.info.converged = true;
      break;
    }
    if (iter >= max_iter) break;

    const double old_ai = alpha[i], old_aj = alpha[j];
    double ai = old_ai, aj = old_aj;
    const double qij = y[i] * y[j] * K(i, j);
    if (y[i] != y[j]) {
      double quad = K(i, i) + K(j, j) + 2.0 * qij;
      if (quad <= 0) quad = detail::kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) { aj = 0; ai = diff; }
      } else {
        if (ai < 0) { ai = 0; aj = -diff; }
      }
      if (diff > 0) {
        if (ai > C) { ai = C; aj = C - diff; }
      } else {
        if (aj > C) { aj = C; ai = C + diff; }
      }
    } else {
      double quad = K(i, i) + K(j, j) - 2.0 * qij;
      if (quad <= 0) quad = detail::kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > C) {
        if (ai > C) { ai = C; aj = sum - C; }
      } else {
        if (aj < 0) { aj = 0; ai = sum; }
      }
      if (sum > C) {
        if (aj > C) { aj = C; ai = sum - C; }
      } else {
        if (ai < 0) { ai = 0; aj = sum; }
      }
    }
    alpha[i] = ai;
    alpha[j] = aj;
    const double dai = ai - old_ai, daj = aj - old_aj;
    for (Eigen::Index t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[i] * K(t, i) * dai + y[j] * K(t, j) * daj);
    }
  }
  sol.info.iterations = iter;

  // rho: mean of y G over free vectors, else midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, free_sum = 0.0;
  std::size_t free_count = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    const bool at_upper = alpha[t] >= C, at_lower = alpha[t] <= 0;
    if (at_upper) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (ub + lb) / 2.0;
  sol.alpha = std::move(alpha);
  sol.bias = -rho;
  return sol;
}

inline SvmModel model_from_dual(const KernelSpec& kernel, double C, std::span<const Eigen::VectorXd> xs,
                                std::span<const int> labels, const DualSolution& sol) {
  SvmModel m = SvmModel::empty(kernel, C);
  m.bias = sol.bias;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const double a = sol.alpha[static_cast<Eigen::Index>(t)];
    if (a > 0.0) {
      m.support_vectors.push_back(xs[t]);
      m.dual_coefs.push_back(a * labels[t]);
    }
  }
  return m;
}

inline TrainResult smo_train(std::span<const Eigen::VectorXd> xs, std::span<const int> labels,
                             const KernelSpec& kernel, double C, double tol = kDefaultTolerance,
                             std::size_t max_iter = kDefaultMaxIterations) {
  if (xs.size() != labels.size()) throw InvalidArgument("feature and label counts differ");
  for (const auto& x : xs) detail::check_finite(x);
  detail::check_labels(labels);
  const Eigen::MatrixXd K = gram_matrix(kernel, xs);
  const DualSolution sol = smo_solve(K, labels, C, tol, max_iter);
  return {model_from_dual(kernel, C, xs, labels, sol), sol.info};
}

inline double decision_value(const SvmModel& m, const Eigen::VectorXd& x) {
  double f = m.bias;
  for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
    f += m.dual_coefs[i] * m.kernel(m.support_vectors[i], x);
  }
  return f;
}

/// sign(f(x)) with 0 mapped to +1.
inline int classify(const SvmModel& m, const Eigen::VectorXd& x) {
  return decision_value(m, x) >= 0.0 ? 1 : -1;
}

/// Dual objective sum|coef| - 1/2 coef' K coef of a trained model.
inline double dual_objective(const SvmModel& m) {
  double linear = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < m.dual_coefs.size(); ++i) {
    linear += std::abs(m.dual_coefs[i]);
    for (std::size_t j = 0; j < m.dual_coefs.size(); ++j) {
      quad += m.dual_coefs[i] * m.dual_coefs[j] * m.kernel(m.support_vectors[i], m.support_vectors[j]);
    }
  }
  return linear - 0.5 * quad;
}

// Online learning: LASVM-style PROCESS / REPROCESS on the working set S.
// Each example s carries beta_s = alpha_s y_s in [A_s, B_s] = [min(0, C y_s), max(0, C y_s)]
// and gradient g_s = y_s - sum_t beta_t k(s, t).

namespace detail {

class OnlineSolver {
 public:
  OnlineSolver(const SvmModel& m, double C, double tol) : kernel_(m.kernel), C_(C), tol_(tol) {
    for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
      append(m.support_vectors[i], m.dual_coefs[i] > 0 ? 1 : -1, m.dual_coefs[i]);
    }
    for (std::size_t i = 0; i < m.pending.size(); ++i) append(m.pending[i], m.pending_labels[i], 0.0);
    for (std::size_t s = 0; s < size(); ++s) {
      double g = y_[s];
      for (std::size_t t = 0; t < size(); ++t) g -= beta_[t] * k_[s][t];
      g_.push_back(g);
    }
    bias_ = m.bias;
  }

  /// Returns false when the example satisfies the KKT conditions and was not inserted.
  bool contains(long id) const { return std::find(id_.begin(), id_.end(), id) != id_.end(); }

  bool process(const Eigen::VectorXd& x, int y, long id = -1) {
    std::vector<double> row(size());
    double g = y;
    for (std::size_t t = 0; t < size(); ++t) {
      row[t] = kernel_(xs_[t], x);
      g -= beta_[t] * row[t];
    }
    long partner = -1;
    for (std::size_t s = 0; s < size(); ++s) {
      if (y > 0 && beta_[s] > lower(s) && (partner < 0 || g_[s] < g_[partner])) partner = static_cast<long>(s);
      if (y < 0 && beta_[s] < upper(s) && (partner < 0 || g_[s] > g_[partner])) partner = static_cast<long>(s);
    }
    if (partner < 0) {
      // Nothing to pair with yet: keep the example if it violates the margin.
      if (y * (bias_ + y - g) >= 1.0) return false;
      insert(x, y, std::move(row), g, id);
      refresh_bias();
      return true;
    }
    const double gap = y > 0 ? g - g_[partner] : g_[partner] - g;
    if (gap <= tol_) return false;
    insert(x, y, std::move(row), g, id);
    const std::size_t k = size() - 1;
    if (y > 0) step(k, static_cast<std::size_t>(partner));
    else step(static_cast<std::size_t>(partner), k);
    return true;
  }

  /// One REPROCESS step; false once the most violating pair is within tol.
  bool reprocess() {
    const auto [i, j] = violating_pair();
    if (i < 0 || j < 0 || g_[i] - g_[j] <= tol_) return false;
    step(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    return true;
  }

  void finish(std::size_t max_steps) {
    for (std::size_t s = 0; s < max_steps && reprocess(); ++s) {
    }
    remove_blatant_non_support();
    refresh_bias();
  }

  SvmModel export_model() const {
    SvmModel m = SvmModel::empty(kernel_, C_);
    m.bias = bias_;
    for (std::size_t s = 0; s < size(); ++s) {
      if (beta_[s] != 0.0) {
        m.support_vectors.push_back(xs_[s]);
        m.dual_coefs.push_back(beta_[s]);
      } else {
        m.pending.push_back(xs_[s]);
        m.pending_labels.push_back(y_[s]);
      }
    }
    return m;
  }

 private:
  std::size_t size() const noexcept { return xs_.size(); }
  double lower(std::size_t s) const { return y_[s] > 0 ? 0.0 : -C_; }
  double upper(std::size_t s) const { return y_[s] > 0 ? C_ : 0.0; }

  void append(const Eigen::VectorXd& x, int y, double beta) {
    for (std::size_t t = 0; t < size(); ++t) {
      const double v = kernel_(xs_[t], x);
      k_[t].push_back(v);
    }
    std::vector<double> row;
    for (std::size_t t = 0; t < size(); ++t) row.push_back(k_[t].back());
    row.push_back(kernel_(x, x));
    k_.push_back(std::move(row));
    xs_.push_back(x);
    y_.push_back(y);
    beta_.push_back(beta);
    id_.push_back(-1);
  }

  void insert(const Eigen::VectorXd& x, int y, std::vector<double> row, double g, long id) {
    id_.push_back(id);
    for (std::size_t t = 0; t < size(); ++t) k_[t].push_back(row[t]);
    row.push_back(kernel_(x, x));
    k_.push_back(std::move(row));
    xs_.push_back(x);
    y_.push_back(y);
    beta_.push_back(0.0);
    g_.push_back(g);
  }

  void erase(std::size_t s) {
    id_.erase(id_.begin() + static_cast<long>(s));
    xs_.erase(xs_.begin() + static_cast<long>(s));
    y_.erase(y_.begin() + static_cast<long>(s));
    beta_.erase(beta_.begin() + static_cast<long>(s));
    g_.erase(g_.begin() + static_cast<long>(s));
    k_.erase(k_.begin() + static_cast<long>(s));
    for (auto& row : k_) row.erase(row.begin() + static_cast<long>(s));
  }

  std::pair<long, long> violating_pair() const {
    long i = -1, j = -1;
    for (std::size_t s = 0; s < size(); ++s) {
      if (beta_[s] < upper(s) && (i < 0 || g_[s] > g_[i])) i = static_cast<long>(s);
      if (beta_[s] > lower(s) && (j < 0 || g_[s] < g_[j])) j = static_cast<long>(s);
    }
    return {i, j};
  }

  void step(std::size_t i, std::size_t j) {
    double curvature = k_[i][i] + k_[j][j] - 2.0 * k_[i][j];
    if (curvature <= 0.0) curvature = kTau;
    const double lambda =
        std::min({(g_[i] - g_[j]) / curvature, upper(i) - beta_[i], beta_[j] - lower(j)});
    beta_[i] += lambda;
    beta_[j] -= lambda;
    for (std::size_t s = 0; s < size(); ++s) g_[s] -= lambda * (k_[i][s] - k_[j][s]);
  }

  void remove_blatant_non_support() {
    const auto [i, j] = violating_pair();
    if (i < 0 || j < 0) return;
    const double gi = g_[i], gj = g_[j];
    for (std::size_t s = size(); s-- > 0;) {
      if (beta_[s] != 0.0) continue;
      if ((y_[s] < 0 && g_[s] >= gi) || (y_[s] > 0 && g_[s] <= gj)) erase(s);
    }
  }

  void refresh_bias() {
    const auto [i, j] = violating_pair();
    if (i >= 0 && j >= 0) bias_ = (g_[i] + g_[j]) / 2.0;
    else if (i >= 0) bias_ = g_[i];
    else if (j >= 0) bias_ = g_[j];
  }

  KernelSpec kernel_;
  double C_, tol_;
  std::vector<Eigen::VectorXd> xs_;
  std::vector<int> y_;
  std::vector<double> beta_, g_;
  std::vector<long> id_;  // caller's example index, -1 if unknown
  std::vector<std::vector<double>> k_;
  double bias_ = 0.0;
};

}  // namespace detail

/// Adds one example to a model: PROCESS the example, then REPROCESS until the
/// most violating pair is within tol. An example that already satisfies the
/// KKT conditions leaves the model unchanged.
inline SvmModel online_update(const SvmModel& m, const Eigen::VectorXd& x, int label, double C,
                              double tol = kDefaultTolerance) {
  detail::check_finite(x);
  if (label != 1 && label != -1) throw InvalidArgument("binary labels must be +1 or -1");
  if (!(C > 0.0)) throw InvalidArgument("C must be > 0");
  if (!m.support_vectors.empty() && C != m.C) throw InvalidArgument("C differs from the model's C");
  const Eigen::Index dim = !m.support_vectors.empty() ? m.support_vectors.front().size()
                           : !m.pending.empty()       ? m.pending.front().size()
                                                      : x.size();
  if (x.size() != dim) throw InvalidArgument("example dimension differs from the model's");
  detail::OnlineSolver solver(m, C, tol);
  if (!solver.process(x, label)) return m;
  solver.finish(kDefaultMaxIterations);
  return solver.export_model();
}

/// Streams the examples through the online solver: PROCESS each example not
/// already in the working set followed by one REPROCESS step, then finish the
/// pass. Passes repeat until one inserts nothing (or max_passes is reached).
inline SvmModel online_fit(const SvmModel& m, std::span<const Eigen::VectorXd> xs, std::span<const int> labels,
                           double C, double tol = kDefaultTolerance, std::size_t max_passes = 20) {
  if (xs.size() != labels.size()) throw InvalidArgument("feature and label counts differ");
  if (!(C > 0.0)) throw InvalidArgument("C must be > 0");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    detail::check_finite(xs[i]);
    if (labels[i] != 1 && labels[i] != -1) throw InvalidArgument("binary labels must be +1 or -1");
  }
  detail::OnlineSolver solver(m, C, tol);
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    bool inserted = false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto id = static_cast<long>(i);
      if (solver.contains(id)) continue;
      if (solver.process(xs[i], labels[i], id)) {
        inserted = true;
        solver.reprocess();
      }
    }
    solver.finish(kDefaultMaxIterations);
    if (!inserted) break;
  }
  return solver.export_model();
}

// Serialization

inline nlohmann::json kernel_to_json(const KernelSpec& k) {
  switch (k.kind) {
    case KernelKind::Linear: return {{"kind", "linear"}};
    case KernelKind::Polynomial: return {{"kind", "polynomial"}, {"degree", k.degree}, {"offset", k.offset}};
    case KernelKind::Rbf: return {{"kind", "rbf"}, {"gamma", k.gamma}};
  }
  return {};
}

inline KernelSpec kernel_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "linear") return KernelSpec::linear();
  if (kind == "polynomial") return KernelSpec::polynomial(j.at("degree").get<int>(), j.at("offset").get<double>());
  if (kind == "rbf") return KernelSpec::rbf(j.at("gamma").get<double>());
  throw DataError("unknown kernel kind \"" + kind + "\"");
}

namespace detail {

inline nlohmann::json vectors_json(const std::vector<Eigen::VectorXd>& vs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& v : vs) out.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  return out;
}

inline std::vector<Eigen::VectorXd> vectors_from(const nlohmann::json& j) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& row : j) {
    const auto values = row.get<std::vector<double>>();
    out.emplace_back(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
  return out;
}

}  // namespace detail

/// Per-model fields; kernel and C live at the document level.
inline nlohmann::json binary_to_json(const SvmModel& m) {
  nlohmann::json out = {
      {"bias", m.bias},
      {"dual_coefs", m.dual_coefs},
      {"support_vectors", detail::vectors_json(m.support_vectors)},
  };
  if (!m.pending.empty()) {
    out["pending"] = detail::vectors_json(m.pending);
    out["pending_labels"] = m.pending_labels;
  }
  return out;
}

inline SvmModel binary_from_json(const nlohmann::json& j, const KernelSpec& kernel, double C) {
  SvmModel m = SvmModel::empty(kernel, C);
  m.bias = j.at("bias").get<double>();
  m.dual_coefs = j.at("dual_coefs").get<std::vector<double>>();
  m.support_vectors = detail::vectors_from(j.at("support_vectors"));
  if (m.dual_coefs.size() != m.support_vectors.size()) throw DataError("support vector / coefficient count mismatch");
  for (double c : m.dual_coefs) {
    if (!(std::abs(c) > 0.0 && std::abs(c) <= C)) throw DataError("dual coefficient outside (0, C]");
  }
  if (j.contains("pending")) {
    m.pending = detail::vectors_from(j.at("pending"));
    m.pending_labels = j.at("pending_labels").get<std::vector<int>>();
    if (m.pending.size() != m.pending_labels.size()) throw DataError("pending vector / label count mismatch");
  }
  return m;
}

}  // namespace facekit::svm
