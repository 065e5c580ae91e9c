#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "facekit/error.hpp"
#include "facekit/rng.hpp"

namespace facekit::subspace {

inline constexpr int kFormatVersion = 1;
/// Gram eigenvalues at or below this fraction of the trace are treated as zero.
inline constexpr double kDegenerateEigenRatio = 1e-12;

struct ImageVector {
  Eigen::VectorXd values;
  std::string label;
};

enum class BasisKind { Random, Pca };

inline std::string to_string(BasisKind k) { return k == BasisKind::Random ? "random" : "pca"; }

/// d_in x d_out projection matrix plus the centering vector.
struct ProjectionBasis {
  BasisKind kind = BasisKind::Random;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd mean;
  std::optional<std::uint64_t> seed;

  Eigen::Index d_in() const { return matrix.rows(); }
  Eigen::Index d_out() const { return matrix.cols(); }
};

/// Unscaled Gaussian projection: i.i.d. N(0,1) entries drawn column by column
/// from Rng(seed).
inline ProjectionBasis random_basis(Eigen::Index d_in, Eigen::Index d_out, std::uint64_t seed) {
  if (d_out < 1 || d_in < 1) throw InvalidArgument("projection dimensions must be >= 1");
  if (d_out > d_in) throw InvalidArgument("d_out exceeds d_in");
  ProjectionBasis basis;
  basis.kind = BasisKind::Random;
  basis.seed = seed;
  basis.matrix.resize(d_in, d_out);
  Rng rng(seed);
  double* data = basis.matrix.data();  // column-major
  for (Eigen::Index i = 0; i < d_in * d_out; ++i) data[i] = rng.normal();
  basis.mean = Eigen::VectorXd::Zero(d_in);
  return basis;
}

/// Eigenpairs of the n x n Gram matrix A'A, sorted by eigenvalue descending.
struct GramEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // column j pairs with values[j]
};

inline GramEigen gram_eigen(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd gram = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) throw DataError("Gram eigendecomposition failed");
  GramEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

inline Eigen::MatrixXd stack_columns(std::span<const ImageVector> training) {
  const Eigen::Index d = training.front().values.size();
  Eigen::MatrixXd a(d, static_cast<Eigen::Index>(training.size()));
  for (std::size_t i = 0; i < training.size(); ++i) {
    if (training[i].values.size() != d) throw InvalidArgument("training vectors differ in dimension");
    a.col(static_cast<Eigen::Index>(i)) = training[i].values;
  }
  return a;
}

/// PCA basis computed from the small Gram matrix of the mean-centered
/// corpus A: if (A'A) v = lambda v then A v is an eigenvector of AA' with
/// the same eigenvalue. Columns are normalize(A v_j) for the d_out largest
/// non-degenerate eigenvalues.
inline ProjectionBasis pca_basis(std::span<const ImageVector> training, Eigen::Index d_out) {
  const auto n = static_cast<Eigen::Index>(training.size());
  if (n < 2) throw InvalidArgument("PCA needs at least two training vectors");
  if (d_out < 1) throw InvalidArgument("d_out must be >= 1");
  if (d_out > n - 1) {
    throw InvalidArgument("PCA d_out " + std::to_string(d_out) + " exceeds n - 1 = " +
                          std::to_string(n - 1));
  }
  Eigen::MatrixXd a = stack_columns(training);
  ProjectionBasis basis;
  basis.kind = BasisKind::Pca;
  basis.mean = a.rowwise().mean();
  a.colwise() -= basis.mean;

  const GramEigen eig = gram_eigen(a);
  const double trace = eig.values.sum();
  Eigen::Index usable = 0;
  while (usable < n && trace > 0.0 && eig.values[usable] > kDegenerateEigenRatio * trace) ++usable;
  if (usable < d_out) {
    throw DataError("PCA: only " + std::to_string(usable) +
                    " non-degenerate eigenpairs, requested " + std::to_string(d_out));
  }
  basis.matrix = a * eig.vectors.leftCols(d_out);
  for (Eigen::Index j = 0; j < d_out; ++j) basis.matrix.col(j).normalize();
  return basis;
}

/// matrix' (x - mean)
inline Eigen::VectorXd project(const ProjectionBasis& basis, const Eigen::VectorXd& x) {
  if (x.size() != basis.d_in()) {
    throw InvalidArgument("vector dimension " + std::to_string(x.size()) + " != basis d_in " +
                          std::to_string(basis.d_in()));
  }
  return basis.matrix.transpose() * (x - basis.mean);
}

struct GalleryEntry {
  Eigen::VectorXd projected;
  std::string label;
};

struct SubspaceModel {
  ProjectionBasis basis;
  std::vector<GalleryEntry> gallery;
};

inline SubspaceModel fit(ProjectionBasis basis, std::span<const ImageVector> training) {
  SubspaceModel model{std::move(basis), {}};
  model.gallery.reserve(training.size());
  for (const auto& v : training) model.gallery.push_back({project(model.basis, v.values), v.label});
  return model;
}

struct Neighbor {
  std::string label;
  double distance = 0.0;
  std::size_t index = 0;
};

/// Nearest gallery entry to an already-projected query; ties go to the
/// earliest entry.
inline Neighbor nearest_projected(std::span<const GalleryEntry> gallery, const Eigen::VectorXd& q) {
  if (gallery.empty()) throw InvalidArgument("nearest neighbor on an empty gallery");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    if (gallery[i].projected.size() != q.size()) throw InvalidArgument("gallery dimension mismatch");
    const double d = (gallery[i].projected - q).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return {gallery[best].label, std::sqrt(best_d), best};
}

inline Neighbor nearest_neighbor(const SubspaceModel& model, const Eigen::VectorXd& x) {
  return nearest_projected(model.gallery, project(model.basis, x));
}

// Serialization

namespace detail {

inline nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd vector_from(const nlohmann::json& j, Eigen::Index expected) {
  const auto values = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != expected) {
    throw DataError("vector has " + std::to_string(values.size()) + " entries, expected " +
                    std::to_string(expected));
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), expected);
}

}  // namespace detail

inline nlohmann::json basis_to_json(const ProjectionBasis& b) {
  nlohmann::json columns = nlohmann::json::array();
  for (Eigen::Index j = 0; j < b.d_out(); ++j) columns.push_back(detail::vector_json(b.matrix.col(j)));
  nlohmann::json out = {
      {"kind", to_string(b.kind)},
      {"d_in", b.d_in()},
      {"d_out", b.d_out()},
      {"mean", detail::vector_json(b.mean)},
      {"matrix", std::move(columns)},
  };
  if (b.seed) out["seed"] = *b.seed;
  return out;
}

inline ProjectionBasis basis_from_json(const nlohmann::json& j) {
  ProjectionBasis b;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "random") {
    b.kind = BasisKind::Random;
  } else if (kind == "pca") {
    b.kind = BasisKind::Pca;
  } else {
    throw DataError("unknown basis kind \"" + kind + "\"");
  }
  const auto d_in = j.at("d_in").get<Eigen::Index>();
  const auto d_out = j.at("d_out").get<Eigen::Index>();
  if (d_in < 1 || d_out < 1 || d_out > d_in) throw DataError("invalid basis dimensions");
  b.mean = detail::vector_from(j.at("mean"), d_in);
  const auto& columns = j.at("matrix");
  if (!columns.is_array() || static_cast<Eigen::Index>(columns.size()) != d_out) {
    throw DataError("basis matrix must have d_out columns");
  }
  b.matrix.resize(d_in, d_out);
  for (Eigen::Index c = 0; c < d_out; ++c) b.matrix.col(c) = detail::vector_from(columns[c], d_in);
  if (j.contains("seed")) b.seed = j.at("seed").get<std::uint64_t>();
  return b;
}

inline nlohmann::json to_json(const SubspaceModel& m) {
  nlohmann::json out = basis_to_json(m.basis);
  out["format"] = "facekit-subspace";
  out["version"] = kFormatVersion;
  nlohmann::json gallery = nlohmann::json::array();
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& g : m.gallery) {
    gallery.push_back(detail::vector_json(g.projected));
    labels.push_back(g.label);
  }
  out["gallery"] = std::move(gallery);
  out["labels"] = std::move(labels);
  return out;
}

inline SubspaceModel from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "facekit-subspace") throw DataError("not a subspace model document");
    if (j.at("version") != kFormatVersion) {
      throw DataError("unsupported subspace model version " + j.at("version").dump());
    }
    SubspaceModel m;
    m.basis = basis_from_json(j);
    const auto& gallery = j.at("gallery");
    const auto& labels = j.at("labels");
    if (gallery.size() != labels.size()) throw DataError("gallery and labels differ in length");
    for (std::size_t i = 0; i < gallery.size(); ++i) {
      m.gallery.push_back({detail::vector_from(gallery[i], m.basis.d_out()), labels[i].get<std::string>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed subspace model: ") + e.what());
  }
}

}  // namespace facekit::subspace
