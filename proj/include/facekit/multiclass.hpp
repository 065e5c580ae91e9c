#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "facekit/error.hpp"
#include "facekit/subspace.hpp"
#include "facekit/svm.hpp"

namespace facekit::svm {

inline constexpr int kFormatVersion = 1;

/// One-vs-rest: models[c] separates classes[c] (+1) from everything else (-1).
struct MulticlassModel {
  std::vector<std::string> classes;  // sorted
  std::vector<SvmModel> models;
};

inline std::vector<std::string> sorted_classes(std::span<const std::string> labels) {
  std::vector<std::string> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

inline MulticlassModel ovr_train(std::span<const Eigen::VectorXd> xs, std::span<const std::string> labels,
                                 const KernelSpec& kernel, double C, double tol = kDefaultTolerance) {
  if (xs.size() != labels.size()) throw InvalidArgument("feature and label counts differ");
  for (const auto& x : xs) detail::check_finite(x);
  MulticlassModel out;
  out.classes = sorted_classes(labels);
  if (out.classes.size() < 2) throw InvalidArgument("one-vs-rest training needs at least two classes");
  const Eigen::MatrixXd K = gram_matrix(kernel, xs);
  std::vector<int> y(labels.size());
  for (const auto& cls : out.classes) {
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == cls ? 1 : -1;
    out.models.push_back(model_from_dual(kernel, C, xs, y, smo_solve(K, y, C, tol)));
  }
  return out;
}

inline std::vector<double> ovr_decision_values(const MulticlassModel& m, const Eigen::VectorXd& x) {
  std::vector<double> out;
  out.reserve(m.models.size());
  for (const auto& model : m.models) {
    if (!model.support_vectors.empty() && model.support_vectors.front().size() != x.size()) {
      throw InvalidArgument("query dimension differs from the model's");
    }
    out.push_back(decision_value(model, x));
  }
  return out;
}

/// Class with the largest decision value; ties go to the smallest label.
inline std::string ovr_predict(const MulticlassModel& m, const Eigen::VectorXd& x) {
  if (m.models.empty()) throw InvalidArgument("empty multiclass model");
  const auto values = ovr_decision_values(m, x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < values.size(); ++c) {
    if (values[c] > values[best]) best = c;
  }
  return m.classes[best];
}

/// Per-dimension min-max scaling to [0, 1] fitted on training data.
struct MinMaxScaler {
  Eigen::VectorXd min;
  Eigen::VectorXd max;

  static MinMaxScaler fit(std::span<const Eigen::VectorXd> xs) {
    if (xs.empty()) throw InvalidArgument("cannot fit a scaler on no data");
    MinMaxScaler s{xs.front(), xs.front()};
    for (const auto& x : xs) {
      if (x.size() != s.min.size()) throw InvalidArgument("training vectors differ in dimension");
      s.min = s.min.cwiseMin(x);
      s.max = s.max.cwiseMax(x);
    }
    return s;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    if (x.size() != min.size()) throw InvalidArgument("scaler dimension mismatch");
    Eigen::VectorXd out(x.size());
    for (Eigen::Index d = 0; d < x.size(); ++d) {
      const double range = max[d] - min[d];
      out[d] = range > 0.0 ? (x[d] - min[d]) / range : 0.0;
    }
    return out;
  }
};

/// Feature pipeline in front of a one-vs-rest SVM: optional PCA projection,
/// then min-max scaling.
struct SvmClassifier {
  std::optional<subspace::ProjectionBasis> pca;
  MinMaxScaler scaler;
  MulticlassModel svm;
  double tol = kDefaultTolerance;

  Eigen::VectorXd features(const Eigen::VectorXd& x) const {
    return scaler.apply(pca ? subspace::project(*pca, x) : x);
  }

  std::string predict(const Eigen::VectorXd& x) const { return ovr_predict(svm, features(x)); }
};

struct SvmTrainOptions {
  KernelSpec kernel = KernelSpec::quadratic();
  double C = 1.0;
  double tol = kDefaultTolerance;
  std::optional<Eigen::Index> pca_dim;
};

inline SvmClassifier train_classifier(std::span<const subspace::ImageVector> training,
                                      const SvmTrainOptions& opts) {
  if (training.empty()) throw InvalidArgument("SVM training needs data");
  SvmClassifier c;
  c.tol = opts.tol;
  if (opts.pca_dim) c.pca = subspace::pca_basis(training, *opts.pca_dim);
  std::vector<Eigen::VectorXd> raw;
  std::vector<std::string> labels;
  for (const auto& v : training) {
    raw.push_back(c.pca ? subspace::project(*c.pca, v.values) : v.values);
    labels.push_back(v.label);
  }
  c.scaler = MinMaxScaler::fit(raw);
  for (auto& x : raw) x = c.scaler.apply(x);
  c.svm = ovr_train(raw, labels, opts.kernel, opts.C, opts.tol);
  return c;
}

/// PCA to d_out dimensions, then one-vs-rest SVM on the scaled projections.
inline SvmClassifier pca_svm_pipeline(std::span<const subspace::ImageVector> training, Eigen::Index d_out,
                                      const KernelSpec& kernel, double C, double tol = kDefaultTolerance) {
  return train_classifier(training, {kernel, C, tol, d_out});
}

// Serialization

inline nlohmann::json to_json(const SvmClassifier& c) {
  const KernelSpec& kernel = c.svm.models.front().kernel;
  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t i = 0; i < c.svm.classes.size(); ++i) {
    nlohmann::json entry = binary_to_json(c.svm.models[i]);
    entry["label"] = c.svm.classes[i];
    classes.push_back(std::move(entry));
  }
  nlohmann::json out = {
      {"format", "facekit-svm"},
      {"version", kFormatVersion},
      {"kernel", kernel_to_json(kernel)},
      {"C", c.svm.models.front().C},
      {"tol", c.tol},
      {"scaler",
       {{"min", std::vector<double>(c.scaler.min.data(), c.scaler.min.data() + c.scaler.min.size())},
        {"max", std::vector<double>(c.scaler.max.data(), c.scaler.max.data() + c.scaler.max.size())}}},
      {"classes", std::move(classes)},
  };
  if (c.pca) out["pca"] = subspace::basis_to_json(*c.pca);
  return out;
}

inline SvmClassifier from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "facekit-svm") throw DataError("not an SVM model document");
    if (j.at("version") != kFormatVersion) throw DataError("unsupported SVM model version " + j.at("version").dump());
    SvmClassifier c;
    const KernelSpec kernel = kernel_from_json(j.at("kernel"));
    const double C = j.at("C").get<double>();
    c.tol = j.at("tol").get<double>();
    const auto mn = j.at("scaler").at("min").get<std::vector<double>>();
    const auto mx = j.at("scaler").at("max").get<std::vector<double>>();
    if (mn.size() != mx.size()) throw DataError("scaler min/max differ in length");
    c.scaler.min = Eigen::Map<const Eigen::VectorXd>(mn.data(), static_cast<Eigen::Index>(mn.size()));
    c.scaler.max = Eigen::Map<const Eigen::VectorXd>(mx.data(), static_cast<Eigen::Index>(mx.size()));
    for (const auto& entry : j.at("classes")) {
      c.svm.classes.push_back(entry.at("label").get<std::string>());
      c.svm.models.push_back(binary_from_json(entry, kernel, C));
    }
    if (c.svm.classes.size() < 2) throw DataError("SVM model needs at least two classes");
    if (j.contains("pca")) c.pca = subspace::basis_from_json(j.at("pca"));
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed SVM model: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("invalid SVM model: ") + e.what());
  }
}

}  // namespace facekit::svm
