#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "facekit/image.hpp"
#include "facekit/svm.hpp"
#include "facekit/rng.hpp"

namespace fixtures {

/// Dark textured background crossed by a bright textured band along row
/// and column 45..54. The band touches all four borders, so Otsu
/// segmentation returns the full frame as the single object.
inline facekit::GrayImage cross_image(std::uint64_t seed) {
  facekit::Rng rng(seed);
  std::vector<double> px(100 * 100);
  for (std::size_t r = 0; r < 100; ++r) {
    for (std::size_t c = 0; c < 100; ++c) {
      const bool band = (r >= 45 && r < 55) || (c >= 45 && c < 55);
      px[r * 100 + c] = std::round(band ? rng.uniform(170, 250) : rng.uniform(20, 90));
    }
  }
  return facekit::GrayImage(100, 100, std::move(px));
}

inline facekit::GrayImage random_image(facekit::Rng& rng, std::size_t w, std::size_t h) {
  std::vector<double> px(w * h);
  for (double& v : px) v = static_cast<double>(rng.index(256));
  return facekit::GrayImage(w, h, std::move(px));
}

inline Eigen::VectorXd gaussian_vector(facekit::Rng& rng, Eigen::Index d, double sigma = 1.0) {
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.normal(0.0, sigma);
  return v;
}

struct LabeledSet {
  std::vector<Eigen::VectorXd> xs;
  std::vector<int> ys;
};

/// n points in [-2,2]^dim with random labels, at least one of each class.
inline LabeledSet random_binary_set(facekit::Rng& rng, std::size_t n, Eigen::Index dim = 2) {
  LabeledSet s;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd x(dim);
    for (Eigen::Index k = 0; k < dim; ++k) x[k] = rng.uniform(-2.0, 2.0);
    s.xs.push_back(x);
    s.ys.push_back(i == 0 ? 1 : i == 1 ? -1 : (rng.uniform() < 0.5 ? 1 : -1));
  }
  return s;
}

/// Two Gaussian clouds centred at (+1,+1) and (-1,-1).
inline LabeledSet two_blobs(facekit::Rng& rng, std::size_t per_class, double sigma) {
  LabeledSet s;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const int y = i % 2 == 0 ? 1 : -1;
    s.xs.push_back(Eigen::Vector2d(y + rng.normal(0, sigma), y + rng.normal(0, sigma)));
    s.ys.push_back(y);
  }
  return s;
}

inline std::vector<Eigen::VectorXd> probe_grid(int side = 10, double lo = -2.5, double hi = 2.5) {
  std::vector<Eigen::VectorXd> out;
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c)
      out.push_back(Eigen::Vector2d(lo + (hi - lo) * r / (side - 1), lo + (hi - lo) * c / (side - 1)));
  return out;
}

/// KKT audit of a dual solution: box feasibility, equality constraint, and
/// the worst |y f(x) - 1| over unbounded support vectors.
struct KktReport {
  bool box_ok = true;
  double equality = 0.0;
  double free_residual = 0.0;
  std::size_t free_count = 0;
};

inline KktReport audit_kkt(const Eigen::MatrixXd& K, std::span<const int> ys, const Eigen::VectorXd& alpha,
                           double bias, double C, double eps = 1e-12) {
  KktReport r;
  const auto n = static_cast<Eigen::Index>(ys.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (alpha[i] < 0.0 || alpha[i] > C) r.box_ok = false;
    r.equality += alpha[i] * ys[static_cast<std::size_t>(i)];
  }
  r.equality = std::abs(r.equality);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (alpha[i] <= eps || alpha[i] >= C - eps * C) continue;
    double f = bias;
    for (Eigen::Index j = 0; j < n; ++j) f += alpha[j] * ys[static_cast<std::size_t>(j)] * K(j, i);
    r.free_residual = std::max(r.free_residual, std::abs(ys[static_cast<std::size_t>(i)] * f - 1.0));
    ++r.free_count;
  }
  return r;
}

/// Temporary directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    facekit::Rng rng(std::hash<std::string>{}(tag) ^ static_cast<std::uint64_t>(::getpid()));
    path_ = std::filesystem::temp_directory_path() / ("facekit-" + tag + "-" + std::to_string(rng.next_u64() % 1000000000));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
